"""Shifted solves (P - omega -+ i eps) u = f and the limiting-absorption study.

The PLUS side is the lower half-plane, (P - omega - i eps)^{-1}; its eps -> 0
limit is the outgoing solution whose negative is u_infinity. The MINUS side
uses + i eps.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .errors import ParameterError, SolverError
from .operator import DENSE_MAX_N, SymbolModel, apply_spec, assemble_dense, level_spacing, multiplier_on_grid
from .spectral_core import GridField, TorusGrid, sobolev_norm, write_field

RESIDUAL_TOL = 1e-10
LAP_EXPONENTS = (-0.6, -0.75, -1.0, 0.0)
OMEGA_MAX = 0.3


def _shift(omega: float, eps: float, side: str) -> complex:
    if side == "PLUS":
        return omega + 1j * eps
    if side == "MINUS":
        return omega - 1j * eps
    raise ParameterError(f"side must be PLUS or MINUS, got {side!r}")


def residual(model: SymbolModel, z: complex, u: GridField, f: GridField) -> float:
    """Relative residual ||(P - z) u - f|| / ||f|| (spectral l2)."""
    r = apply_spec(model, u.spec) - z * u.spec - f.spec
    return float(np.linalg.norm(r) / np.linalg.norm(f.spec))


def resolve(
    model: SymbolModel,
    omega: float,
    eps: float,
    f: GridField,
    method: str = "auto",
    preconditioner: str = "none",
    side: str = "PLUS",
    rtol: float = 1e-12,
    restart: int = 100,
    maxiter: int = 400,
) -> GridField:
    """Solve (P - omega - i eps) u = f (PLUS) or (P - omega + i eps) u = f (MINUS).

    ``method`` is "dense" (LU on the assembled matrix, n <= 64), "iterative"
    (restarted GMRES on the matrix-free operator) or "auto". ``maxiter`` counts
    restart cycles. The relative residual is checked against 1e-10.
    """
    if not eps > 0:
        raise ParameterError(f"eps must be > 0, got {eps}")
    if not np.isfinite(omega):
        raise ParameterError(f"omega must be finite, got {omega}")
    z = _shift(omega, eps, side)
    g = f.grid
    n = g.n
    if not np.linalg.norm(f.spec):
        return GridField.zeros(g)
    if method == "auto":
        method = "dense" if n <= DENSE_MAX_N else "iterative"

    if method == "dense":
        M = assemble_dense(model, g)
        M[np.diag_indices_from(M)] -= z
        sol = scipy.linalg.solve(M, f.spec.ravel(), overwrite_a=True, check_finite=False)
        u = GridField.from_spectral(g, sol.reshape(n, n))
        history = []
    elif method == "iterative":
        u, history = _gmres(model, z, f, preconditioner, rtol, restart, maxiter)
    else:
        raise ParameterError(f"unknown solve method {method!r}")

    res = residual(model, z, u, f)
    if not res <= RESIDUAL_TOL:
        raise SolverError(
            f"{method} solve at omega={omega}, eps={eps} left relative residual {res:.3e} > {RESIDUAL_TOL:g}",
            history=history + [res],
        )
    return u


def _gmres(model, z, f, preconditioner, rtol, restart, maxiter):
    g = f.grid
    n = g.n
    N = n * n

    def mv(x):
        v = x.reshape(n, n)
        return (apply_spec(model, v) - z * v).ravel()

    A = spla.LinearOperator((N, N), matvec=mv, dtype=complex)
    if preconditioner == "diagonal":
        d = 1.0 / (multiplier_on_grid(g) - z).ravel()
        M = spla.LinearOperator((N, N), matvec=lambda x: d * x, dtype=complex)
    elif preconditioner == "none":
        M = None
    else:
        raise ParameterError(f"unknown preconditioner {preconditioner!r}")

    history: list[float] = []
    b = f.spec.ravel()
    x, info = spla.gmres(
        A, b, rtol=rtol, atol=0.0, restart=restart, maxiter=maxiter, M=M,
        callback=history.append, callback_type="pr_norm",
    )
    if info != 0:
        raise SolverError(
            f"GMRES did not converge in {maxiter} restart cycles (info={info}, last residual "
            f"{history[-1] if history else float('nan'):.3e})",
            history=history,
        )
    return GridField.from_spectral(g, x.reshape(n, n)), history


@dataclass
class ResolventQuery:
    f: GridField
    eps_list: list[float]
    omega: float = 0.0
    delta: float = OMEGA_MAX
    side: str = "PLUS"
    method: str = "auto"
    preconditioner: str = "none"

    def __post_init__(self):
        eps = [float(e) for e in self.eps_list]
        if not eps:
            raise ParameterError("eps_list is empty")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ParameterError(f"eps_list must be strictly decreasing, got {eps}")
        if min(eps) < 1e-4:
            raise ParameterError(f"smallest eps must be >= 1e-4, got {min(eps)}")
        if abs(self.omega) > self.delta:
            raise ParameterError(f"|omega| must be <= {self.delta}, got {self.omega}")
        self.eps_list = eps

    @property
    def grid(self) -> TorusGrid:
        return self.f.grid


@dataclass
class ResolventResult:
    omega: float
    side: str
    fields: list[tuple[float, GridField]]
    exponents: tuple[float, ...]
    norm_table: np.ndarray  # (len(eps), len(exponents))
    cauchy: list[float]
    residuals: list[float]
    spacing: dict = field(default_factory=dict)

    @property
    def eps(self) -> list[float]:
        return [e for e, _ in self.fields]

    @property
    def limit(self) -> GridField:
        """Smallest-eps solve, the numerical stand-in for the eps -> 0 limit."""
        return self.fields[-1][1]

    def norms(self, s: float) -> np.ndarray:
        return self.norm_table[:, self.exponents.index(float(s))]

    def band_ratio(self, s: float = -0.75) -> float:
        v = self.norms(s)
        return float(v.max() / v.min())

    def cauchy_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.cauchy, self.cauchy[1:]))

    def l2_growth(self) -> float:
        v = self.norms(0.0)
        return float(v[-1] / v[0])

    @property
    def passed(self) -> bool:
        return self.band_ratio() <= 2.0 and self.cauchy_decreasing()

    def report(self) -> dict:
        return {
            "omega": self.omega,
            "side": self.side,
            "eps": self.eps,
            "norms": {f"s={s:g}": [float(v) for v in self.norms(s)] for s in self.exponents},
            "cauchy_h-0.75": [float(c) for c in self.cauchy],
            "residuals": self.residuals,
            "band_ratio_h-0.75": self.band_ratio(),
            "cauchy_decreasing": self.cauchy_decreasing(),
            "l2_growth": self.l2_growth(),
            "level_spacing": self.spacing,
            "min_eps_over_spacing": float(min(self.eps) / self.spacing["spacing"]) if self.spacing else None,
            "verdict": "PASS" if self.passed else "FAIL",
        }

    def write(self, out_dir, stem: str = "resolvent") -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [write_norm_table(self, out_dir / f"{stem}_norms.csv")]
        rep = out_dir / f"{stem}_report.json"
        rep.write_text(json.dumps(self.report(), indent=2, sort_keys=True) + "\n")
        paths.append(rep)
        for e, u in self.fields:
            paths.append(write_field(u, out_dir / f"{stem}_eps{e:.6g}.zfld"))
        return paths


def write_norm_table(result: ResolventResult, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps"] + [f"s={s:g}" for s in result.exponents])
        for e, row in zip(result.eps, result.norm_table):
            w.writerow([f"{e:.17g}"] + [f"{v:.17g}" for v in row])
    return path


def lap_study(model: SymbolModel, query: ResolventQuery, spacing: bool = True) -> ResolventResult:
    """Solve over the eps list, tabulate Sobolev norms and consecutive H^{-3/4} differences."""
    fields, rows, res = [], [], []
    z_of = lambda e: _shift(query.omega, e, query.side)  # noqa: E731
    for e in query.eps_list:
        u = resolve(model, query.omega, e, query.f, method=query.method,
                    preconditioner=query.preconditioner, side=query.side)
        fields.append((e, u))
        rows.append([sobolev_norm(u, s) for s in LAP_EXPONENTS])
        res.append(residual(model, z_of(e), u, query.f))
    cauchy = [sobolev_norm(b - a, -0.75) for (_, a), (_, b) in zip(fields, fields[1:])]
    sp = level_spacing(model, query.grid, query.omega) if spacing else {}
    return ResolventResult(
        omega=query.omega,
        side=query.side,
        fields=fields,
        exponents=LAP_EXPONENTS,
        norm_table=np.array(rows),
        cauchy=cauchy,
        residuals=res,
        spacing=sp,
    )


@dataclass
class UInfinity:
    field: GridField
    study: ResolventResult


def u_infinity(model: SymbolModel, query: ResolventQuery) -> UInfinity:
    """-(P - omega - i eps_min)^{-1} f together with the Cauchy diagnostics."""
    study = lap_study(model, query)
    return UInfinity(field=-study.limit, study=study)
