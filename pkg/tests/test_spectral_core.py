import hypothesis as hyp
import hypothesis.extra.numpy as hyp_np
import hypothesis.strategies as st
import numpy as np
import numpy.testing as npt
import pytest

from wavelab.errors import DataCorruptionError, DimensionError, FieldFormatError, ParameterError
from wavelab.spectral_core import (
    GridField,
    TorusGrid,
    bump_values,
    make_bump,
    read_field,
    sobolev_norm,
    write_field,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
complex_arrays = hyp_np.arrays(np.complex128, (8, 8), elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))


def test_grid_rejects_odd_and_small():
    for n in (7, 6, 9, 0):
        with pytest.raises(ParameterError):
            TorusGrid(n)


def test_single_mode_coefficient(grid16):
    x1, x2 = grid16.mesh
    u = GridField.from_physical(grid16, np.exp(1j * (3 * x1 - 2 * x2)))
    assert u.coefficient(3, -2) == pytest.approx(1.0, abs=1e-14)
    spec = u.spec.copy()
    spec[grid16.mode_index(3, -2)] = 0
    assert np.abs(spec).max() < 1e-14


def test_from_modes_matches_physical(grid16):
    u = GridField.from_modes(grid16, {(1, 0): 0.5, (-1, 0): 0.5})
    npt.assert_allclose(u.phys, np.cos(grid16.mesh[0]), atol=1e-14)


@hyp.given(complex_arrays)
def test_roundtrip_and_parseval(a):
    g = TorusGrid(8)
    u = GridField.from_physical(g, a)
    back = GridField.from_spectral(g, u.spec).phys
    npt.assert_allclose(back, a, atol=1e-9 * (1 + np.abs(a).max()))
    # c_k = n^-2 sum u e^{-ikx}: sum |c_k|^2 is the mean of |u|^2
    assert u.l2() ** 2 == pytest.approx(np.mean(np.abs(a) ** 2), rel=1e-10, abs=1e-20)


@hyp.given(complex_arrays, st.floats(-2, 2), st.floats(0, 1))
def test_sobolev_monotone_in_s(a, s, ds):
    u = GridField.from_physical(TorusGrid(8), a)
    assert sobolev_norm(u, s) <= sobolev_norm(u, s + ds) * (1 + 1e-12) + 1e-300


def test_sobolev_single_mode(grid16):
    u = GridField.from_modes(grid16, {(3, 4): 1.0})
    assert sobolev_norm(u, 0.5) == pytest.approx(26**0.25)
    assert sobolev_norm(u, 0) == pytest.approx(1.0)


def test_nonfinite_rejected(grid16):
    a = np.zeros((16, 16), complex)
    a[2, 3] = np.nan
    with pytest.raises(DataCorruptionError):
        GridField.from_physical(grid16, a).spec


def test_shape_mismatch(grid16):
    with pytest.raises(DimensionError):
        GridField.from_physical(grid16, np.zeros((8, 8)))
    with pytest.raises(DimensionError):
        GridField.zeros(grid16) + GridField.zeros(TorusGrid(8))


def test_bump_is_periodic_and_centered():
    x = np.linspace(-10, 10, 41)
    npt.assert_allclose(bump_values(x, 0.3), bump_values(x + 2 * np.pi, 0.3 - 2 * np.pi), rtol=1e-13)
    g = TorusGrid(64)
    u = make_bump(g)
    i = np.unravel_index(np.argmax(u.phys.real), u.phys.shape)
    assert g.x[i[0]] == pytest.approx(3 * np.pi / 2)
    assert g.x[i[1]] == 0.0
    with pytest.raises(ParameterError):
        make_bump(g, sigma=2.0)


def test_smooth_bump_spectrum_decays():
    u = make_bump(TorusGrid(64))
    k = TorusGrid(64).japanese
    assert np.abs(u.spec[k > 24]).max() < 1e-12 * np.abs(u.spec).max()


def test_zfld_roundtrip(tmp_path, rng):
    g = TorusGrid(16)
    u = GridField.from_spectral(g, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    p = write_field(u, tmp_path / "u.zfld")
    raw = p.read_bytes()
    assert raw[:4] == b"ZFLD" and raw[4] == 1 and len(raw) == 12 + 16 * 256
    v = read_field(p, n=16)
    npt.assert_array_equal(v.spec, u.spec)
    # lattice order: first entry is mode (-8, -8)
    first = np.frombuffer(raw[12:28], "<c16")[0]
    assert first == u.coefficient(-8, -8)


def test_zfld_errors(tmp_path, grid16):
    p = write_field(make_bump(grid16), tmp_path / "u.zfld")
    with pytest.raises(FieldFormatError, match="expected n=32, found n=16"):
        read_field(p, n=32)
    raw = p.read_bytes()
    (tmp_path / "short.zfld").write_bytes(raw[:-16])
    with pytest.raises(FieldFormatError, match="expected n=16"):
        read_field(tmp_path / "short.zfld")
    (tmp_path / "magic.zfld").write_bytes(b"XFLD" + raw[4:])
    with pytest.raises(FieldFormatError, match="magic"):
        read_field(tmp_path / "magic.zfld")
    (tmp_path / "tiny.zfld").write_bytes(b"ZF")
    with pytest.raises(FieldFormatError):
        read_field(tmp_path / "tiny.zfld")


@pytest.mark.parametrize("modes,s,expected", [
    ({(0, 0): 1.0}, 0.7, 1.0),
    ({(1, 1): 1.0}, -0.75, 3**-0.375),
    ({(3, 4): 2.0}, 1.0, 2 * 26**0.5),
])
def test_sobolev_examples(grid16, modes, s, expected):
    assert sobolev_norm(GridField.from_modes(grid16, modes), s) == pytest.approx(expected, rel=1e-14)


def test_bump_mean_resolution_independent():
    means = [make_bump(TorusGrid(n)).coefficient(0, 0).real for n in (64, 128)]
    assert means[0] > 0
    assert means[0] == pytest.approx(means[1], abs=1e-12)
