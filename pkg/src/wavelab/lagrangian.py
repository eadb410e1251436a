"""Attracting/repelling Lagrangians over the limit cycles and the function Phi.

On the cone over a cycle, Phi(x, xi) = |xi| phi(tau), where tau is the flow
time along the cycle and phi is the periodic solution of

    phi' + beta phi = 1,     beta = r' along the cycle.

That is H_p Phi = 1 written in the homogeneous coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import LimitCycle, angle_dist, field_arrays, find_limit_cycles, wrap_centered
from .errors import DegenerateCycleError, SolverError
from .operator import SymbolModel

CONORMAL_TOL = 1e-8


@dataclass(frozen=True)
class Conormal:
    x1_c: float
    xi1_sign: int


@dataclass
class SliceComponent:
    cycle: LimitCycle
    conormal: Conormal | None
    phi: np.ndarray
    density: np.ndarray
    phase_check: dict = field(default_factory=dict)

    @property
    def tau(self) -> np.ndarray:
        return self.cycle.tau


@dataclass
class LagrangianSlice:
    omega: float
    sign: str  # "PLUS" (sinks) or "MINUS" (sources)
    components: list[SliceComponent]

    def report(self) -> dict:
        comps = []
        for c in self.components:
            comps.append({
                "x1_c": c.conormal.x1_c if c.conormal else None,
                "xi1_sign": c.conormal.xi1_sign if c.conormal else None,
                "phi_min": float(c.phi.min()),
                "phi_max": float(c.phi.max()),
                "c_prime": c.phase_check.get("c_prime"),
                "rel_err": c.phase_check.get("rel_err"),
            })
        return {"omega": self.omega, "sign": self.sign, "components": comps}


def conormal_descriptor(cycle: LimitCycle, tol: float = CONORMAL_TOL) -> Conormal | None:
    """Conormal data when the cycle is {x1 = const, theta in {0, pi}}."""
    st = cycle.states
    if not st.size:
        return None
    if np.max(angle_dist(st[:, 0], cycle.x1_star)) > tol:
        return None
    if np.max(angle_dist(st[:, 2], 0.0)) <= tol:
        return Conormal(float(cycle.x1_star), +1)
    if np.max(angle_dist(st[:, 2], np.pi)) <= tol:
        return Conormal(float(cycle.x1_star), -1)
    return None


def _spectral_derivative(values: np.ndarray, period: float) -> np.ndarray:
    n = values.size
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0
    return np.real(np.fft.ifft(2j * np.pi * k / period * np.fft.fft(values)))


def _periodic_antiderivative(values: np.ndarray, period: float) -> np.ndarray:
    """Zero-mean periodic antiderivative of the fluctuating part of ``values``."""
    n = values.size
    k = np.fft.fftfreq(n, d=1.0 / n)
    vh = np.fft.fft(values)
    out = np.zeros_like(vh)
    nz = k != 0
    if n % 2 == 0:
        nz &= k != n // 2
    out[nz] = vh[nz] / (2j * np.pi * k[nz] / period)
    return np.real(np.fft.ifft(out))


def solve_phi(beta: np.ndarray, period: float) -> np.ndarray:
    """Periodic solution of phi' + beta phi = 1 on uniform samples over one period.

    With beta = mean + p'(tau), psi = phi e^{p} solves psi' + mean psi = e^{p},
    which is diagonal in Fourier space. Equivalent to the integrating-factor
    closed form phi(0) = int_0^T exp(-int_s^T beta) ds / (1 - exp(-int_0^T beta)).
    """
    beta = np.asarray(beta, dtype=float)
    mean = beta.mean()
    int_beta = mean * period
    if abs(-np.expm1(-int_beta)) < 1e-10:
        raise DegenerateCycleError(f"degenerate cycle: int beta = {int_beta:.3e}, periodic solution not unique")
    p = _periodic_antiderivative(beta - mean, period)
    E = np.exp(p)
    n = beta.size
    k = np.fft.fftfreq(n, d=1.0 / n)
    psi = np.real(np.fft.ifft(np.fft.fft(E) / (mean + 2j * np.pi * k / period)))
    return psi / E


def phi_residual(phi: np.ndarray, beta: np.ndarray, period: float) -> float:
    return float(np.max(np.abs(_spectral_derivative(phi, period) + beta * phi - 1.0)))


def cycle_speed(model: SymbolModel, cycle: LimitCycle) -> np.ndarray:
    F = field_arrays(model, cycle.states.T)
    return np.sqrt(F[0] ** 2 + F[1] ** 2 + F[2] ** 2)


def invariant_density(model: SymbolModel, cycle: LimitCycle) -> np.ndarray:
    """mu = C / |cycle speed| with int_0^T mu d tau = 1."""
    speed = cycle_speed(model, cycle)
    if np.any(speed <= 0):
        raise DegenerateCycleError("cycle speed vanishes; no invariant density")
    mu = 1.0 / speed
    return mu / (mu.mean() * cycle.period)


def density_transport_defect(component: SliceComponent, model: SymbolModel, h: float = 0.1) -> float:
    """Max change of the arc measure mu |gamma'| d tau under the time-h flow."""
    cyc = component.cycle
    g = component.density * cycle_speed(model, cyc)
    n = g.size
    k = np.fft.fftfreq(n, d=1.0 / n)
    shifted = np.real(np.fft.ifft(np.fft.fft(g) * np.exp(2j * np.pi * k * h / cyc.period)))
    return float(np.max(np.abs(shifted - g)))


def _component(model: SymbolModel, cycle: LimitCycle) -> SliceComponent:
    phi = solve_phi(cycle.beta, cycle.period)
    mu = invariant_density(model, cycle)
    return SliceComponent(cycle=cycle, conormal=conormal_descriptor(cycle), phi=phi, density=mu)


def build_slice(model: SymbolModel, omega: float, sign: str = "PLUS", cycles=None) -> LagrangianSlice:
    """Components over the SINK (PLUS) or SOURCE (MINUS) cycles at energy omega."""
    sign = sign.upper()
    if sign not in ("PLUS", "MINUS"):
        raise ValueError(f"sign must be PLUS or MINUS, got {sign!r}")
    if cycles is None:
        cycles = find_limit_cycles(model, omega)
    if not cycles:
        raise SolverError(f"no limit cycles found for model {model.name} at omega={omega}")
    want = "SINK" if sign == "PLUS" else "SOURCE"
    comps = [_component(model, c) for c in cycles if c.kind == want]
    return LagrangianSlice(omega=float(omega), sign=sign, components=comps)


def _match(cycles: list[LimitCycle], ref: LimitCycle) -> LimitCycle:
    same = [c for c in cycles if c.kind == ref.kind]
    if not same:
        raise SolverError(f"no {ref.kind} cycle to continue from x1={ref.x1_star:.6g}")
    return min(same, key=lambda c: angle_dist(c.x1_star, ref.x1_star) + angle_dist(c.theta_star, ref.theta_star))


def phase_derivative_check(model: SymbolModel, omega: float, component: SliceComponent, h: float = 1e-4) -> dict:
    """Compare c'(omega) (centered differences of the cycle position) with -sign(xi1) phi.

    For a conormal component F(omega, xi) = c(omega) xi1, so d_omega F = -Phi
    reads c' = -sign(xi1) phi.
    """
    if component.conormal is None:
        report = {"status": "unsupported geometry", "c_prime": None, "minus_phi_scaled": None, "rel_err": None}
        component.phase_check = report
        return report
    ref = component.cycle
    try:
        plus = _match(find_limit_cycles(model, omega + h, with_floquet=False), ref)
        minus = _match(find_limit_cycles(model, omega - h, with_floquet=False), ref)
    except SolverError as exc:
        raise SolverError(f"finite-difference cycle continuation failed at omega={omega}+-{h}: {exc}") from None
    dx = wrap_centered(plus.x1_star - minus.x1_star)
    c_prime = float(dx / (2 * h))
    phi = float(component.phi.mean())
    target = -component.conormal.xi1_sign * phi
    report = {
        "status": "ok",
        "c_prime": c_prime,
        "minus_phi_scaled": target,
        "rel_err": abs(c_prime - target) / abs(phi),
    }
    component.phase_check = report
    return report
