"""Forced evolution i u_t = P u + f, u(0) = 0.

``evolve_rk4`` is the matrix-free production path. ``evolve_spectral_oracle``
diagonalizes the dense matrix and applies phi_t(P) f with
phi_t(lam) = (exp(-i lam t) - 1) / lam, so the two are independent routes to
the same solution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, NumericalBlowupError, ParameterError
from .operator import SymbolModel, apply_spec, dense_eigh
from .spectral_core import GridField, read_field, sobolev_weights, write_field

DT_MAX = 0.05
ORACLE_MAX_N = 32


@dataclass
class EvolutionConfig:
    t_final: float
    dt: float = 0.01
    snapshot_times: list[float] = field(default_factory=list)
    norm_exponents: list[float] = field(default_factory=lambda: [-0.75, 0.0, 0.25])
    norm_every: float = 1.0

    def __post_init__(self):
        if not self.t_final >= 0:
            raise ParameterError(f"t_final must be >= 0, got {self.t_final}")
        if not 0 < self.dt <= DT_MAX:
            raise ParameterError(f"dt must lie in (0, {DT_MAX}], got {self.dt}")
        if not self.norm_every > 0:
            raise ParameterError(f"norm_every must be > 0, got {self.norm_every}")
        snaps = [float(t) for t in self.snapshot_times]
        if snaps != sorted(snaps):
            raise ParameterError("snapshot_times must be sorted")
        if snaps and (snaps[0] < 0 or snaps[-1] > self.t_final + 1e-12):
            raise ParameterError(f"snapshot_times must lie in [0, {self.t_final}]")
        self.snapshot_times = snaps
        self.norm_exponents = [float(s) for s in self.norm_exponents]

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class EvolutionTrace:
    times: list[float]
    exponents: list[float]
    norms: np.ndarray  # shape (len(times), len(exponents))
    snapshots: list[tuple[float, GridField | Path]]
    final: GridField

    def snapshot(self, i: int) -> GridField:
        """The i-th snapshot, loading it from disk if it was written out."""
        item = self.snapshots[i][1]
        return read_field(item) if isinstance(item, Path) else item

    def snapshot_at(self, t: float) -> GridField:
        i = int(np.argmin([abs(ts - t) for ts, _ in self.snapshots]))
        return self.snapshot(i)

    def norm_series(self, s: float) -> np.ndarray:
        return self.norms[:, self.exponents.index(float(s))]

    def write_csv(self, path) -> Path:
        return write_norm_csv(path, self.times, self.exponents, self.norms)


def write_norm_csv(path, times, exponents, norms) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"s={s:g}" for s in exponents])
        for t, row in zip(times, norms):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
    return path


def read_norm_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    exponents = [float(h.split("=", 1)[1]) for h in rows[0][1:]]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return data[:, 0], exponents, data[:, 1:]


def _norms(spec: np.ndarray, weights: list[np.ndarray]) -> list[float]:
    c2 = np.abs(spec) ** 2
    return [float(np.sqrt((w * c2).sum())) for w in weights]


def evolve_rk4(
    model: SymbolModel,
    f: GridField,
    cfg: EvolutionConfig,
    snapshot_dir=None,
    grid=None,
) -> EvolutionTrace:
    """Classical RK4 for du/dt = -i (P u + f) from u(0) = 0.

    Norms are sampled every ``cfg.norm_every`` (nearest step) and snapshots at
    the steps nearest to ``cfg.snapshot_times``. With ``snapshot_dir`` the
    snapshots are written as ZFLD files and only their paths are kept.
    """
    if grid is not None and grid != f.grid:
        raise DimensionError(f"forcing lives on n={f.n}, expected n={grid.n}")
    g = f.grid
    dt = cfg.dt
    fs = f.spec
    weights = [sobolev_weights(g, s) for s in cfg.norm_exponents]
    n_steps = cfg.n_steps

    norm_steps = sorted({int(round(k * cfg.norm_every / dt)) for k in range(int(np.floor(cfg.t_final / cfg.norm_every + 1e-9)) + 1)})
    norm_steps = [s for s in norm_steps if s <= n_steps]
    snap_steps = [min(int(round(t / dt)), n_steps) for t in cfg.snapshot_times]
    if snapshot_dir is not None:
        snapshot_dir = Path(snapshot_dir)
        snapshot_dir.mkdir(parents=True, exist_ok=True)

    times, rows, snapshots = [], [], []
    u = np.zeros_like(fs)

    def record(step, u):
        t = step * dt
        if norm_steps and step == norm_steps[0]:
            norm_steps.pop(0)
            times.append(t)
            rows.append(_norms(u, weights))
        while snap_steps and step == snap_steps[0]:
            snap_steps.pop(0)
            fld = GridField.from_spectral(g, u.copy())
            if snapshot_dir is not None:
                path = snapshot_dir / f"u_t{t:08.3f}.zfld"
                write_field(fld, path)
                snapshots.append((t, path))
            else:
                snapshots.append((t, fld))

    def rhs(v):
        return -1j * (apply_spec(model, v) + fs)

    record(0, u)
    for step in range(1, n_steps + 1):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(u).all():
            raise NumericalBlowupError(f"non-finite solution at step {step} (t={step * dt:g})", step=step)
        record(step, u)

    return EvolutionTrace(
        times=times,
        exponents=list(cfg.norm_exponents),
        norms=np.array(rows).reshape(len(times), len(weights)),
        snapshots=snapshots,
        final=GridField.from_spectral(g, u),
    )


def phi_t(lam, t: float) -> np.ndarray:
    """(exp(-i lam t) - 1) / lam with the removable value -i t at lam = 0."""
    z = -1j * np.asarray(lam, dtype=float) * t
    out = np.full(z.shape, -1j * t, dtype=complex)
    nz = z != 0
    out[nz] = -1j * t * np.expm1(z[nz]) / z[nz]
    return out


class SpectralOracle:
    """Cached eigendecomposition P = U diag(lam) U^H for functional calculus."""

    def __init__(self, model: SymbolModel, grid):
        from .errors import CapacityError

        if grid.n > ORACLE_MAX_N:
            raise CapacityError(f"spectral oracle limited to n <= {ORACLE_MAX_N}, got n={grid.n}")
        self.model = model
        self.grid = grid
        self.lam, self.U = dense_eigh(model, grid)

    def apply(self, func_values: np.ndarray, f: GridField) -> GridField:
        if f.grid != self.grid:
            raise DimensionError(f"forcing lives on n={f.n}, oracle built for n={self.grid.n}")
        coef = self.U.conj().T @ f.spec.ravel()
        out = self.U @ (func_values * coef)
        return GridField.from_spectral(self.grid, out.reshape(self.grid.n, self.grid.n))

    def solution(self, f: GridField, t: float) -> GridField:
        return self.apply(phi_t(self.lam, t), f)


def evolve_spectral_oracle(model: SymbolModel, f: GridField, t: float, grid=None) -> GridField:
    """u(t) = U phi_t(Lambda) U^H f; no inversion of P."""
    return SpectralOracle(model, grid or f.grid).solution(f, t)


def smooth_window(lam, center: float, half_width: float) -> np.ndarray:
    """C-infinity filter: 1 on |lam - center| <= half_width / 2, 0 outside half_width."""
    x = np.abs(np.asarray(lam, dtype=float) - center) / half_width  # in units of delta
    # transition from 1 at x = 1/2 to 0 at x = 1
    s = np.clip(2.0 * (1.0 - x), 0.0, 1.0)  # 1 at x<=1/2, 0 at x>=1

    def bump(y):
        return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)

    return bump(s) / (bump(s) + bump(1.0 - s))


def filtered_forcing(model: SymbolModel, f: GridField, center: float, half_width: float, oracle=None) -> GridField:
    oracle = oracle or SpectralOracle(model, f.grid)
    return oracle.apply(smooth_window(oracle.lam, center, half_width), f)


def evolve_filtered(model: SymbolModel, f: GridField, cfg: EvolutionConfig, center: float, half_width: float) -> EvolutionTrace:
    """RK4 evolution forced by phi(P) f, phi a smooth bump around ``center``."""
    return evolve_rk4(model, filtered_forcing(model, f, center, half_width), cfg)
