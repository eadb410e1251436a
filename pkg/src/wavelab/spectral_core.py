"""Torus grid, Fourier transforms, Sobolev norms, forcing and ZFLD field files.

Fields live on the uniform ``n x n`` grid of ``T^2 = (R / 2 pi Z)^2``. The
spectral coefficients follow

    c_k = n^{-2} sum_j u(x_j) exp(-i <k, x_j>),   u(x) = sum_k c_k exp(i <k, x>),

and are stored in numpy FFT order (``k = fftfreq(n) * n`` on each axis, axis 0
is ``k1``). Only the ZFLD file format uses the centered lattice order
``-n/2 .. n/2 - 1``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft

from .errors import DataCorruptionError, FieldFormatError, ParameterError, DimensionError

MAGIC = b"ZFLD"
VERSION = 1
_HEADER = struct.Struct("<4sB3xI")


@dataclass(frozen=True)
class TorusGrid:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ParameterError(f"grid size must be an even integer >= 8, got {self.n}")

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.n

    @cached_property
    def x(self) -> np.ndarray:
        """1D physical coordinates 2 pi j / n."""
        return self.spacing * np.arange(self.n)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.x, indexing="ij")

    @cached_property
    def k(self) -> np.ndarray:
        """1D integer wavenumbers in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(int)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.k, self.k, indexing="ij")

    @cached_property
    def japanese(self) -> np.ndarray:
        """<k> = (1 + |k|^2)^{1/2} on the FFT-ordered lattice."""
        k1, k2 = self.wavenumbers
        return np.sqrt(1.0 + k1**2 + k2**2)

    def mode_index(self, k1: int, k2: int) -> tuple[int, int]:
        """Array index of lattice mode (k1, k2) in FFT order."""
        half = self.n // 2
        for kk in (k1, k2):
            if not -half <= kk < half:
                raise ParameterError(f"mode {kk} outside lattice [-{half}, {half - 1}]")
        return k1 % self.n, k2 % self.n


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise DataCorruptionError(f"non-finite values in {what}")


def _forward(phys: np.ndarray) -> np.ndarray:
    n = phys.shape[0]
    return scipy.fft.fft2(phys) / n**2


def _inverse(spec: np.ndarray) -> np.ndarray:
    n = spec.shape[0]
    return scipy.fft.ifft2(spec) * n**2


class GridField:
    """Complex field on a :class:`TorusGrid`, held in physical and/or spectral form.

    The missing representation is computed on first access; both are then
    kept. Arrays are treated as immutable once attached.
    """

    __slots__ = ("grid", "_phys", "_spec")

    def __init__(self, grid: TorusGrid, phys=None, spec=None):
        if phys is None and spec is None:
            raise ParameterError("GridField needs a physical or spectral array")
        shape = (grid.n, grid.n)
        for name, arr in (("phys", phys), ("spec", spec)):
            if arr is not None and np.shape(arr) != shape:
                raise DimensionError(f"{name} array has shape {np.shape(arr)}, grid needs {shape}")
        self.grid = grid
        self._phys = None if phys is None else np.asarray(phys, dtype=complex)
        self._spec = None if spec is None else np.asarray(spec, dtype=complex)

    @classmethod
    def from_physical(cls, grid: TorusGrid, phys) -> "GridField":
        return cls(grid, phys=phys)

    @classmethod
    def from_spectral(cls, grid: TorusGrid, spec) -> "GridField":
        return cls(grid, spec=spec)

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "GridField":
        z = np.zeros((grid.n, grid.n), dtype=complex)
        return cls(grid, phys=z, spec=z.copy())

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict) -> "GridField":
        """Field from a ``{(k1, k2): coefficient}`` mapping."""
        spec = np.zeros((grid.n, grid.n), dtype=complex)
        for (k1, k2), c in modes.items():
            spec[grid.mode_index(k1, k2)] += c
        return cls(grid, spec=spec)

    @property
    def phys(self) -> np.ndarray:
        if self._phys is None:
            _check_finite(self._spec, "spectral coefficients")
            self._phys = _inverse(self._spec)
        return self._phys

    @property
    def spec(self) -> np.ndarray:
        if self._spec is None:
            _check_finite(self._phys, "physical values")
            self._spec = _forward(self._phys)
        return self._spec

    @property
    def n(self) -> int:
        return self.grid.n

    def coefficient(self, k1: int, k2: int) -> complex:
        return complex(self.spec[self.grid.mode_index(k1, k2)])

    def l2(self) -> float:
        """Spectral l2 norm, (sum_k |c_k|^2)^{1/2}."""
        return float(np.linalg.norm(self.spec))

    def _combine(self, other, op):
        if isinstance(other, GridField):
            if other.grid != self.grid:
                raise DimensionError(f"grid mismatch: n={self.n} vs n={other.n}")
            return GridField(self.grid, spec=op(self.spec, other.spec))
        return GridField(self.grid, spec=op(self.spec, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return GridField(self.grid, spec=self.spec * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return GridField(self.grid, spec=-self.spec)

    def conj(self) -> "GridField":
        return GridField(self.grid, phys=np.conj(self.phys))

    def __repr__(self):
        return f"GridField(n={self.n})"


def to_spectral(field: GridField) -> GridField:
    spec = field.spec
    return GridField(field.grid, phys=field._phys, spec=spec)


def to_physical(field: GridField) -> GridField:
    phys = field.phys
    return GridField(field.grid, phys=phys, spec=field._spec)


def sobolev_weights(grid: TorusGrid, s: float) -> np.ndarray:
    return grid.japanese ** (2.0 * s)


def sobolev_norm(field: GridField, s: float) -> float:
    """H^s norm (sum_k <k>^{2s} |c_k|^2)^{1/2}."""
    if not np.isfinite(s):
        raise ParameterError(f"Sobolev exponent must be finite, got {s}")
    c2 = np.abs(field.spec) ** 2
    if s == 0:
        return float(np.sqrt(c2.sum()))
    return float(np.sqrt((sobolev_weights(field.grid, s) * c2).sum()))


def bump_values(x1, x2, center=(-np.pi / 2, 0.0), sigma=0.5, images=3):
    """Periodized Gaussian sum_m exp(-|x - center - 2 pi m|^2 / (2 sigma^2)), |m_i| <= images.

    Displacements are first wrapped into [-pi, pi) so the result is exactly
    2 pi-periodic.
    """
    d1 = np.mod(np.asarray(x1, dtype=float) - center[0] + np.pi, 2 * np.pi) - np.pi
    d2 = np.mod(np.asarray(x2, dtype=float) - center[1] + np.pi, 2 * np.pi) - np.pi
    shifts = 2 * np.pi * np.arange(-images, images + 1)
    g1 = sum(np.exp(-((d1 - m) ** 2) / (2 * sigma**2)) for m in shifts)
    g2 = sum(np.exp(-((d2 - m) ** 2) / (2 * sigma**2)) for m in shifts)
    return g1 * g2


def make_bump(grid: TorusGrid, center=(-np.pi / 2, 0.0), sigma: float = 0.5) -> GridField:
    if not 0 < sigma <= np.pi / 2:
        raise ParameterError(f"bump width sigma must lie in (0, pi/2], got {sigma}")
    x1, x2 = grid.mesh
    vals = bump_values(x1, x2, center, sigma)
    return GridField.from_physical(grid, vals.astype(complex))


def write_field(field: GridField, path) -> Path:
    """Write the spectral coefficients in ZFLD format (lattice order)."""
    path = Path(path)
    n = field.n
    centered = np.fft.fftshift(field.spec)
    payload = np.ascontiguousarray(centered, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n))
        fh.write(payload)
    return path


def read_field(path, n: int | None = None) -> GridField:
    """Read a ZFLD file. ``n``, if given, is the grid size the caller expects."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: file too short for ZFLD header ({len(raw)} bytes)")
    magic, version, n_header = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported ZFLD version {version}")
    if raw[5:8] != b"\0\0\0":
        raise FieldFormatError(f"{path}: nonzero header padding")
    if n is not None and n != n_header:
        raise FieldFormatError(f"{path}: expected n={n}, found n={n_header} in header")
    body = len(raw) - _HEADER.size
    if body != 16 * n_header**2:
        found = int(round(np.sqrt(body / 16))) if body >= 0 else 0
        raise FieldFormatError(
            f"{path}: header n={n_header} needs {16 * n_header**2} data bytes, "
            f"found {body} (n={found} worth); expected n={n_header}, found n={found}"
        )
    try:
        grid = TorusGrid(n_header)
    except ParameterError as exc:
        raise FieldFormatError(f"{path}: invalid grid size in header: {exc}") from None
    centered = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(n_header, n_header)
    spec = np.fft.ifftshift(centered).astype(complex)
    return GridField.from_spectral(grid, spec)
