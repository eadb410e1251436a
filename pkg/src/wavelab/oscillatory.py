"""One-ray oscillatory integrals: J(t, xi), its stationary-phase limit, and L(h).

J(t, xi) = int phi(w) a(w, xi) exp(-i F(w, xi)) g_t(w) dw with
g_t(w) = (1 - exp(-i t w)) / (i w), the s-integral of exp(-i s w) over [0, t].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import wofz

from .errors import ConfigError, ParameterError, ToleranceError


def smooth_step(x) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)

    def f(y):
        return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)

    return f(x) / (f(x) + f(1.0 - x))


def bump(w, delta: float) -> np.ndarray:
    """exp(1 - 1 / (1 - (w/delta)^2)) on |w| < delta, zero outside; equals 1 at w = 0."""
    x = np.asarray(w, dtype=float) / delta
    inside = np.abs(x) < 1
    return np.where(inside, np.exp(1.0 - 1.0 / np.where(inside, 1.0 - x * x, 1.0)), 0.0)


def g_t(w, t: float):
    """(1 - e^{-itw}) / (iw) = t e^{-itw/2} sinc(tw / 2pi); equals t at w = 0."""
    w = np.asarray(w, dtype=float)
    return t * np.exp(-0.5j * t * w) * np.sinc(t * w / (2 * np.pi))


@dataclass
class OscillatoryModel:
    """F(w, xi) = c(w) xi, a(w, xi) = chi(xi) <xi>^{order}, phi = bump supported in (-delta, delta)."""

    c: Callable[[float], float]
    c_prime: Callable[[float], float]
    delta: float = 0.3
    symbol_order: float = -0.5
    amplitude: Callable | None = None  # overrides the default a(w, xi)
    label: str = "custom"

    def __post_init__(self):
        if not 0 < self.delta:
            raise ParameterError(f"phi_delta must be > 0, got {self.delta}")

    def F(self, w, xi):
        return self.c(w) * xi

    def a(self, w, xi):
        if self.amplitude is not None:
            return self.amplitude(w, xi)
        return smooth_step(np.asarray(xi, dtype=float) - 1.0) * (1.0 + np.asarray(xi, dtype=float) ** 2) ** (self.symbol_order / 2)

    def phi(self, w):
        return bump(w, self.delta)

    @property
    def phi0(self) -> float:
        return float(self.phi(0.0))

    def max_abs_c_prime(self, samples: int = 201) -> float:
        w = np.linspace(-self.delta, self.delta, samples)
        return float(max(abs(self.c_prime(x)) for x in w))

    @property
    def sign(self) -> int:
        """Sign of d_w F = c'(w) xi on the support of phi (xi > 0); 0 if it changes."""
        w = np.linspace(-self.delta, self.delta, 201)
        v = np.array([self.c_prime(x) for x in w])
        if np.all(v < 0):
            return -1
        if np.all(v > 0):
            return 1
        return 0

    def leading(self, xi: float) -> complex:
        return 2 * np.pi * self.a(0.0, xi) * self.phi0 * np.exp(-1j * self.F(0.0, xi))


def linear_model(c0: float, c1: float, **kw) -> OscillatoryModel:
    return polynomial_model([c0, c1], **kw)


def polynomial_model(coeffs, **kw) -> OscillatoryModel:
    """c(w) = sum coeffs[k] w^k."""
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    dp = p.deriv()
    return OscillatoryModel(c=lambda w: float(p(w)), c_prime=lambda w: float(dp(w)), label=f"poly{list(coeffs)}", **kw)


def builtin_model(name: str, delta: float = 0.3, symbol_order: float = -0.5) -> OscillatoryModel:
    """c(w) from the xi1 > 0 sink component of a built-in Lagrangian slice.

    The component at w = 0 is located by the cycle search; for nearby w the
    conormal line x1 = c(w) is continued by solving V(c, 0) = w, which is the
    characteristic condition on a conormal cycle with theta = 0.
    """
    from .lagrangian import build_slice
    from .operator import BUILTINS

    model = BUILTINS.get(name)
    if model is None or not model.potential:
        raise ConfigError(f"no built-in Lagrangian for {name!r}")
    comp = [c for c in build_slice(model, 0.0, "PLUS").components if c.conormal and c.conormal.xi1_sign == 1]
    if not comp:
        raise ConfigError(f"model {name} has no conormal xi1 > 0 sink at omega = 0")
    x0 = comp[0].conormal.x1_c

    def c(w):
        return brentq(lambda x: float(model.V(x, 0.0)) - w, x0 - 0.7, x0 + 0.7, xtol=1e-15)

    def c_prime(w):
        return 1.0 / float(model.grad_V(c(w), 0.0)[0])

    return OscillatoryModel(c=c, c_prime=c_prime, delta=delta, symbol_order=symbol_order, label=f"builtin:{name}")


def load_oscillatory_model(data) -> OscillatoryModel:
    """From {"c": "builtin:p1" | [coefficients], "symbol_order": -0.5, "phi_delta": 0.3} or a JSON path."""
    if isinstance(data, (str, Path)):
        path = Path(data)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        c = data["c"]
        order = float(data.get("symbol_order", -0.5))
        delta = float(data.get("phi_delta", 0.3))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid oscillatory model: {exc!r}") from None
    if isinstance(c, str):
        if not c.startswith("builtin:"):
            raise ConfigError(f"c must be 'builtin:<name>' or a coefficient list, got {c!r}")
        return builtin_model(c.split(":", 1)[1], delta=delta, symbol_order=order)
    return polynomial_model(c, delta=delta, symbol_order=order)


def eval_J(model: OscillatoryModel, t: float, xi: float, tol_scale: float = 1.0) -> complex:
    """Adaptive quadrature of J(t, xi) with absolute tolerance 1e-10 (1 + t) * tol_scale."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    if xi < 1:
        raise ParameterError(f"xi must be >= 1, got {xi}")
    if t == 0:
        return 0j
    tol = 1e-10 * (1.0 + t) * tol_scale
    d = model.delta

    def integrand(w):
        return complex(model.phi(w) * model.a(w, xi) * np.exp(-1j * model.F(w, xi)) * g_t(w, t))

    # split into pieces of a few oscillation lengths so each quad call sees a tame integrand
    freq = t + abs(xi) * model.max_abs_c_prime() + 1.0
    pieces = max(2, int(np.ceil(2 * d * freq / (8 * np.pi))))
    edges = np.unique(np.concatenate([np.linspace(-d, d, pieces + 1), [0.0]]))
    per = tol / (2 * (edges.size - 1))
    total = 0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        for part in (np.real, np.imag):
            val, err = quad(lambda w: part(integrand(w)), lo, hi, epsabs=per, epsrel=0.0, limit=200)
            if err > per:
                raise ToleranceError(f"J quadrature error {err:.2e} > {per:.2e} on [{lo:.4g}, {hi:.4g}] (t={t}, xi={xi})")
            total += val if part is np.real else 1j * val
    return total


def saturation_time(model: OscillatoryModel, xi: float) -> float:
    return 8.0 * xi * model.max_abs_c_prime()


def stationary_phase_compare(model: OscillatoryModel, xi_list=(8, 16, 32, 64, 128, 256)) -> dict:
    """Table of J(t(xi), xi) against the leading term 2 pi a(0, xi) phi(0) e^{-iF(0, xi)}.

    For d_w F < 0 the log-log slope of |J - leading| is fitted with xi = 8
    excluded; for d_w F > 0 the bound |J| xi^2 <= (value at xi = 8) is checked.
    """
    rows = []
    for xi in xi_list:
        t = saturation_time(model, xi)
        J = eval_J(model, t, xi)
        lead = model.leading(xi)
        err = abs(J - lead)
        rows.append({
            "xi": float(xi),
            "t": t,
            "J": J,
            "leading": lead,
            "abs_err": err,
            "scaled_err": err * (1 + xi**2) ** ((1.5 - 0.1) / 2),
            "abs_J_xi2": abs(J) * xi**2,
        })
    out = {"sign": model.sign, "rows": rows}
    fit = [r for r in rows if r["xi"] > 8]
    if model.sign < 0 and len(fit) >= 2:
        x = np.log([r["xi"] for r in fit])
        y = np.log([r["abs_err"] for r in fit])
        out["slope"] = float(np.polyfit(x, y, 1)[0])
        out["passed"] = out["slope"] <= -1.2
    elif model.sign > 0:
        ref = next((r["abs_J_xi2"] for r in rows if r["xi"] == 8), rows[0]["abs_J_xi2"])
        out["bound_ref"] = ref
        out["max_abs_J_xi2"] = max(r["abs_J_xi2"] for r in rows)
        out["passed"] = out["max_abs_J_xi2"] <= ref
    return out


def uniform_band(model: OscillatoryModel, xi_list=(8, 16, 32, 64, 128, 256), t_factors=(0.5, 1, 2, 4)) -> dict:
    """sup_t |J(t, xi)| <xi>^{1/2 - 0.1} per xi, and its max over the median."""
    sups = []
    for xi in xi_list:
        vals = [abs(eval_J(model, f * xi, xi)) for f in t_factors]
        sups.append(max(vals) * (1 + xi**2) ** ((0.5 - 0.1) / 2))
    ratio = max(sups) / float(np.median(sups))
    return {"xi": list(map(float, xi_list)), "scaled_sup": sups, "max_over_median": ratio, "passed": ratio <= 3.0}


# -- L(h) ------------------------------------------------------------------


def gaussian_half_transform(sigma):
    """int_0^inf exp(i sigma s - s^2 / 2) ds = sqrt(pi/2) w(sigma / sqrt 2), w the Faddeeva function."""
    return np.sqrt(np.pi / 2) * wofz(np.asarray(sigma, dtype=float) / np.sqrt(2))


def L_integral(G: Callable, alpha: Callable, h: float, omega_max: float = 8.0, tol: float = 1e-13) -> complex:
    """L(h) = int_0^inf int exp((i/h)(G(w) + s w)) psi(s) alpha(w) dw ds with psi(s) = exp(-s^2/2).

    The s-integral is done in closed form; the w-integral is computed in the
    rescaled variable v = w/h on dyadic pieces, since the integrand has a
    peak of width h at w = 0. ``alpha`` must be negligible beyond omega_max.
    """
    if not h > 0:
        raise ParameterError(f"h must be > 0, got {h}")
    V = omega_max / h

    def f(v):
        w = h * v
        return complex(np.exp(1j * G(w) / h) * alpha(w) * gaussian_half_transform(v))

    edges = [0.0, 1.0]
    while edges[-1] < V:
        edges.append(min(2 * edges[-1], V))
    total = 0j
    for sgn in (1.0, -1.0):
        for lo, hi in zip(edges[:-1], edges[1:]):
            for part in (np.real, np.imag):
                val, err = quad(lambda v: part(f(sgn * v)), lo, hi, epsabs=tol, epsrel=1e-12, limit=400)
                if err > max(tol, 1e-10 * abs(val)):
                    raise ToleranceError(f"L(h) quadrature error {err:.2e} on [{lo:.4g}, {hi:.4g}] (h={h})")
                total += val if part is np.real else 1j * val
    return h * total


def log_scaling_L(G: Callable, alpha: Callable, h_list=None, omega_max: float = 8.0) -> list[dict]:
    """Rows {h, L, |L|/h, |L| / (h log(1/h))} for A(s, w) = exp(-s^2/2) alpha(w)."""
    if h_list is None:
        h_list = [2.0**-k for k in range(4, 15)]
    rows = []
    for h in h_list:
        L = L_integral(G, alpha, h, omega_max)
        rows.append({"h": h, "L": L, "abs_L_over_h": abs(L) / h, "ratio": abs(L) / (h * np.log(1 / h))})
    return rows


def log_verdicts(odd_rows: list[dict], even_rows: list[dict], last: int = 4) -> dict:
    """Odd profile: ratio stable within 20% (max/min <= 1.2) over the last h values.
    Even profile: ratio decreases by >= 2x over the same range."""
    r_odd = [r["ratio"] for r in odd_rows[-last:]]
    r_even = [r["ratio"] for r in even_rows[-last:]]
    odd_spread = max(r_odd) / min(r_odd)
    even_drop = r_even[0] / r_even[-1]
    return {
        "odd_spread": odd_spread,
        "odd_passed": odd_spread <= 1.2,
        "even_drop": even_drop,
        "even_passed": even_drop >= 2.0,
    }
