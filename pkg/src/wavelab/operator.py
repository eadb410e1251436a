"""The operator P = m(D) + V(x) with m(k) = k2 / <k>, and its principal symbol.

V is a real trigonometric polynomial. ``apply_operator`` is matrix free
(multiplier in spectral space, potential pointwise in physical space);
``assemble_dense`` builds the same discrete operator as a Hermitian matrix in
the spectral basis, flattened in the FFT order of ``GridField.spec``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import CapacityError, ConfigError, DimensionError
from .spectral_core import GridField, TorusGrid, _forward, _inverse

DENSE_MAX_N = 64
SCAN_MAX_N = 32


@dataclass(frozen=True)
class PotentialTerm:
    freq: tuple[int, int]
    cos: float = 0.0
    sin: float = 0.0


@dataclass(frozen=True)
class SymbolModel:
    """P = <D>^{-1} D_{x2} + V(x), V = sum_j a_j cos<nu_j, x> + b_j sin<nu_j, x>."""

    name: str
    potential: tuple[PotentialTerm, ...] = field(default_factory=tuple)
    multiplier_id: str = "XI2_OVER_JAPANESE"

    def __post_init__(self):
        if self.multiplier_id != "XI2_OVER_JAPANESE":
            raise ConfigError(f"unsupported multiplier {self.multiplier_id!r}")
        for t in self.potential:
            if not (np.isfinite(t.cos) and np.isfinite(t.sin)):
                raise ConfigError(f"potential coefficients must be finite real numbers: {t}")

    # -- potential ---------------------------------------------------------
    def V(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape)
        for t in self.potential:
            ph = t.freq[0] * x1 + t.freq[1] * x2
            out = out + t.cos * np.cos(ph) + t.sin * np.sin(ph)
        return out

    def grad_V(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        shape = np.broadcast(x1, x2).shape
        g1, g2 = np.zeros(shape), np.zeros(shape)
        for t in self.potential:
            ph = t.freq[0] * x1 + t.freq[1] * x2
            d = -t.cos * np.sin(ph) + t.sin * np.cos(ph)
            g1 = g1 + t.freq[0] * d
            g2 = g2 + t.freq[1] * d
        return g1, g2

    def hess_V(self, x1, x2):
        """Second derivatives (V_11, V_12, V_22)."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        shape = np.broadcast(x1, x2).shape
        h11, h12, h22 = np.zeros(shape), np.zeros(shape), np.zeros(shape)
        for t in self.potential:
            ph = t.freq[0] * x1 + t.freq[1] * x2
            d2 = -t.cos * np.cos(ph) - t.sin * np.sin(ph)
            h11 = h11 + t.freq[0] ** 2 * d2
            h12 = h12 + t.freq[0] * t.freq[1] * d2
            h22 = h22 + t.freq[1] ** 2 * d2
        return h11, h12, h22

    @property
    def potential_bound(self) -> float:
        return float(sum(abs(t.cos) + abs(t.sin) for t in self.potential))

    @property
    def depends_on_x2(self) -> bool:
        return any(t.freq[1] != 0 for t in self.potential)

    def shifted(self, omega: float) -> "SymbolModel":
        """The model for P - omega (a constant potential term)."""
        return SymbolModel(
            name=f"{self.name}-shift{omega:g}",
            potential=self.potential + (PotentialTerm((0, 0), cos=-float(omega)),),
        )

    def potential_coefficients(self) -> dict[tuple[int, int], complex]:
        """Fourier coefficients of V: cos -> (e^{i.} + e^{-i.})/2, sin -> (e^{i.} - e^{-i.})/(2i)."""
        coeffs: dict[tuple[int, int], complex] = {}
        for t in self.potential:
            nu = tuple(int(v) for v in t.freq)
            neg = (-nu[0], -nu[1])
            if nu == (0, 0):
                coeffs[nu] = coeffs.get(nu, 0) + t.cos
                continue
            coeffs[nu] = coeffs.get(nu, 0) + t.cos / 2 + t.sin / 2j
            coeffs[neg] = coeffs.get(neg, 0) + t.cos / 2 - t.sin / 2j
        return coeffs

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "name": self.name,
            "potential": [
                {"freq": list(t.freq), "cos": t.cos, "sin": t.sin} for t in self.potential
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SymbolModel":
        try:
            terms = tuple(
                PotentialTerm(
                    freq=(int(t["freq"][0]), int(t["freq"][1])),
                    cos=float(t.get("cos", 0.0)),
                    sin=float(t.get("sin", 0.0)),
                )
                for t in data["potential"]
            )
            return cls(name=str(data["name"]), potential=terms)
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise ConfigError(f"invalid model description: {exc!r}") from None


P1 = SymbolModel("p1", (PotentialTerm((1, 0), cos=-2.0),))
P2 = SymbolModel("p2", (PotentialTerm((1, 0), cos=-0.5),))
FREE = SymbolModel("free", ())
BUILTINS = {"p1": P1, "p2": P2, "free": FREE}


def load_model(spec: str | SymbolModel) -> SymbolModel:
    """Built-in name or path to a JSON model file."""
    if isinstance(spec, SymbolModel):
        return spec
    if spec in BUILTINS:
        return BUILTINS[spec]
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"unknown model {spec!r} (not a built-in and no such file)")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return SymbolModel.from_json(data)


def multiplier(k1, k2):
    return np.asarray(k2, dtype=float) / np.sqrt(1.0 + np.asarray(k1, dtype=float) ** 2 + np.asarray(k2, dtype=float) ** 2)


@lru_cache(maxsize=32)
def _grid_data(model: SymbolModel, n: int):
    grid = TorusGrid(n)
    k1, k2 = grid.wavenumbers
    x1, x2 = grid.mesh
    m = multiplier(k1, k2)
    V = model.V(x1, x2)
    m.setflags(write=False)
    V.setflags(write=False)
    return m, V


def multiplier_on_grid(grid: TorusGrid) -> np.ndarray:
    return _grid_data(FREE, grid.n)[0]


def apply_spec(model: SymbolModel, spec: np.ndarray) -> np.ndarray:
    """P acting on an FFT-ordered coefficient array."""
    m, V = _grid_data(model, spec.shape[0])
    out = m * spec
    if model.potential:
        out = out + _forward(V * _inverse(spec))
    return out


def apply_operator(model: SymbolModel, u: GridField, grid: TorusGrid | None = None) -> GridField:
    if grid is not None and grid != u.grid:
        raise DimensionError(f"grid mismatch: field n={u.n}, operator grid n={grid.n}")
    return GridField.from_spectral(u.grid, apply_spec(model, u.spec))


def principal_symbol_at(model: SymbolModel, x1, x2, theta):
    """q(x, theta) = sin(theta) + V(x): p at xi = (cos theta, sin theta)."""
    return np.sin(theta) + model.V(x1, x2)


def assemble_dense(model: SymbolModel, grid: TorusGrid) -> np.ndarray:
    """Hermitian n^2 x n^2 matrix of P in the (FFT-ordered, flattened) spectral basis.

    The potential part is the cyclic convolution by V's coefficients, which is
    exactly pointwise multiplication on the grid (aliasing included).
    """
    n = grid.n
    if n > DENSE_MAX_N:
        raise CapacityError(f"dense assembly limited to n <= {DENSE_MAX_N}, got n={n}")
    N = n * n
    # computed here rather than through multiplier() so the two paths stay independent
    m = (grid.wavenumbers[1] / grid.japanese).ravel()
    M = np.diag(m.astype(complex))
    idx = np.arange(N)
    i1, i2 = np.divmod(idx, n)
    for (nu1, nu2), c in model.potential_coefficients().items():
        # output mode k = k' + nu (mod n): row index of (i1 + nu1, i2 + nu2)
        rows = ((i1 + nu1) % n) * n + (i2 + nu2) % n
        M[rows, idx] += c
    return M


def dense_matvec_field(M: np.ndarray, u: GridField) -> GridField:
    return GridField.from_spectral(u.grid, (M @ u.spec.ravel()).reshape(u.n, u.n))


@dataclass
class SpectrumScan:
    window: tuple[float, float]
    eigenvalues: np.ndarray
    total: int
    spectrum_min: float
    spectrum_max: float


def dense_eigh(model: SymbolModel, grid: TorusGrid):
    M = assemble_dense(model, grid)
    return scipy.linalg.eigh(M, overwrite_a=True, check_finite=False)


def spectrum_scan(model: SymbolModel, grid: TorusGrid, window=(-0.1, 0.1)) -> SpectrumScan:
    if grid.n > SCAN_MAX_N:
        raise CapacityError(f"spectrum scan limited to n <= {SCAN_MAX_N}, got n={grid.n}")
    lam = scipy.linalg.eigvalsh(assemble_dense(model, grid), check_finite=False)
    lo, hi = window
    inside = lam[(lam > lo) & (lam < hi)]
    return SpectrumScan(
        window=(lo, hi),
        eigenvalues=np.sort(inside),
        total=int(lam.size),
        spectrum_min=float(lam.min()),
        spectrum_max=float(lam.max()),
    )


def block_eigenvalues(model: SymbolModel, grid: TorusGrid) -> np.ndarray:
    """All eigenvalues of the discrete P when V does not depend on x2.

    Each x2-Fourier mode k2 is then invariant, so the spectrum is the union of
    n blocks of size n x n.
    """
    if model.depends_on_x2:
        raise CapacityError("block diagonalization needs a potential independent of x2")
    n = grid.n
    k = grid.k
    coeffs = model.potential_coefficients()
    conv = np.zeros((n, n), dtype=complex)
    rows = np.arange(n)
    for (nu1, _), c in coeffs.items():
        conv[(rows + nu1) % n, rows] += c
    out = []
    for k2 in k:
        block = conv + np.diag(multiplier(k, k2))
        out.append(scipy.linalg.eigvalsh(block, check_finite=False))
    return np.sort(np.concatenate(out))


def level_spacing(model: SymbolModel, grid: TorusGrid, omega: float, half_width: float = 0.05) -> dict:
    """Mean eigenvalue spacing of the discrete operator near ``omega``.

    Exact counts for n <= 32 or x2-independent potentials; otherwise the free
    multiplier's level count is used and flagged as an estimate.
    """
    lo, hi = omega - half_width, omega + half_width
    if grid.n <= SCAN_MAX_N:
        count = spectrum_scan(model, grid, (lo, hi)).eigenvalues.size
        method = "dense"
    elif not model.depends_on_x2:
        lam = block_eigenvalues(model, grid)
        count = int(((lam > lo) & (lam < hi)).sum())
        method = "block"
    else:
        m = multiplier_on_grid(grid)
        count = int(((m > lo) & (m < hi)).sum())
        method = "free-estimate"
    spacing = (hi - lo) / count if count else float("inf")
    return {"omega": omega, "count": count, "spacing": spacing, "method": method}
