import json

import hypothesis as hyp
import hypothesis.strategies as st
import numpy as np
import numpy.testing as npt
import pytest

from wavelab.errors import CapacityError, ConfigError
from wavelab.operator import (
    FREE,
    P1,
    P2,
    PotentialTerm,
    SymbolModel,
    apply_operator,
    apply_spec,
    assemble_dense,
    block_eigenvalues,
    dense_eigh,
    level_spacing,
    load_model,
    multiplier,
    principal_symbol_at,
)
from wavelab.spectral_core import GridField, TorusGrid

TILTED = SymbolModel("tilted", (PotentialTerm((1, 0), cos=-2.0), PotentialTerm((1, 1), sin=0.3)))


def test_free_model_is_diagonal(grid16):
    u = GridField.from_modes(grid16, {(0, 1): 1.0, (2, -3): 2.0})
    Pu = apply_operator(FREE, u)
    assert Pu.coefficient(0, 1) == pytest.approx(2**-0.5)
    assert Pu.coefficient(2, -3) == pytest.approx(2 * -3 / np.sqrt(14))


def test_potential_acts_pointwise(grid16):
    x1, _ = grid16.mesh
    u = GridField.from_physical(grid16, np.ones((16, 16)))
    npt.assert_allclose(apply_operator(P1, u).phys, -2 * np.cos(x1), atol=1e-13)


@pytest.mark.parametrize("model", [P1, P2, TILTED])
def test_dense_matches_matrix_free(model, rng):
    g = TorusGrid(16)
    M = assemble_dense(model, g)
    v = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    npt.assert_allclose(M @ v.ravel(), apply_spec(model, v).ravel(), atol=1e-12)
    npt.assert_allclose(M, M.conj().T, atol=1e-15)


@hyp.given(st.integers(0, 2**32 - 1))
def test_self_adjoint_random_pairs(seed):
    r = np.random.default_rng(seed)
    u = r.standard_normal((8, 8)) + 1j * r.standard_normal((8, 8))
    v = r.standard_normal((8, 8)) + 1j * r.standard_normal((8, 8))
    for model in (P1, TILTED):
        lhs = np.vdot(v, apply_spec(model, u))
        rhs = np.vdot(apply_spec(model, v), u)
        assert abs(lhs - rhs) <= 1e-12 * np.linalg.norm(u) * np.linalg.norm(v)


@hyp.given(st.floats(-50, 50), st.floats(-50, 50))
def test_multiplier_bounded_and_odd(k1, k2):
    m = multiplier(k1, k2)
    assert abs(m) < 1
    assert multiplier(k1, -k2) == pytest.approx(-m)


def test_spectrum_bounded_by_potential():
    lam, _ = dense_eigh(P1, TorusGrid(16))
    assert lam.min() >= -3 and lam.max() <= 3


def test_block_eigenvalues_match_dense():
    g = TorusGrid(16)
    lam, _ = dense_eigh(P2, g)
    npt.assert_allclose(np.sort(lam), block_eigenvalues(P2, g), atol=1e-12)
    with pytest.raises(CapacityError):
        block_eigenvalues(TILTED, g)


def test_level_spacing_methods():
    assert level_spacing(P1, TorusGrid(16), 0.0)["method"] == "dense"
    assert level_spacing(P1, TorusGrid(64), 0.0)["method"] == "block"
    assert level_spacing(TILTED, TorusGrid(64), 0.0)["method"] == "free-estimate"


def test_dense_capacity():
    with pytest.raises(CapacityError):
        assemble_dense(P1, TorusGrid(128))


def test_potential_coefficients_reconstruct_V():
    g = TorusGrid(16)
    x1, x2 = g.mesh
    u = GridField.from_modes(g, TILTED.potential_coefficients())
    npt.assert_allclose(u.phys.real, TILTED.V(x1, x2), atol=1e-14)


def test_gradient_and_hessian_by_differences():
    x1, x2, h = 0.37, -1.2, 1e-6
    g1, g2 = TILTED.grad_V(x1, x2)
    assert g1 == pytest.approx((TILTED.V(x1 + h, x2) - TILTED.V(x1 - h, x2)) / (2 * h), abs=1e-8)
    assert g2 == pytest.approx((TILTED.V(x1, x2 + h) - TILTED.V(x1, x2 - h)) / (2 * h), abs=1e-8)
    h11, h12, _ = TILTED.hess_V(x1, x2)
    assert h12 == pytest.approx((TILTED.grad_V(x1, x2 + h)[0] - TILTED.grad_V(x1, x2 - h)[0]) / (2 * h), abs=1e-7)
    assert h11 == pytest.approx((TILTED.grad_V(x1 + h, x2)[0] - TILTED.grad_V(x1 - h, x2)[0]) / (2 * h), abs=1e-7)


def test_principal_symbol():
    assert principal_symbol_at(P1, -np.pi / 2, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert principal_symbol_at(P1, 0.0, 0.0, np.pi / 2) == pytest.approx(-1.0)


def test_shifted_model_subtracts_constant(grid16, rng):
    v = rng.standard_normal((16, 16)) + 0j
    npt.assert_allclose(apply_spec(P1.shifted(0.3), v), apply_spec(P1, v) - 0.3 * v, atol=1e-14)


def test_load_model_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(TILTED.to_json()))
    assert load_model(str(p)) == TILTED
    assert load_model("p1") is P1
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x",\n "potential": [}')
    with pytest.raises(ConfigError, match="line 2 column"):
        load_model(str(bad))
    with pytest.raises(ConfigError):
        load_model("nope")
    with pytest.raises(ConfigError):
        SymbolModel.from_json({"name": "x"})


@pytest.mark.parametrize("modes,expected", [
    ({(0, 1): 1.0}, {(0, 1): 2**-0.5, (1, 1): -1.0, (-1, 1): -1.0}),
    ({(0, 0): 1.0}, {(1, 0): -1.0, (-1, 0): -1.0}),
    ({(3, 0): 1.0}, {(4, 0): -1.0, (2, 0): -1.0}),
])
def test_p1_mode_shifts(grid16, modes, expected):
    Pu = apply_operator(P1, GridField.from_modes(grid16, modes))
    ref = GridField.from_modes(grid16, expected)
    np.testing.assert_allclose(Pu.spec, ref.spec, atol=1e-14)


def test_p2_principal_symbol():
    assert principal_symbol_at(P2, 0.0, 0.0, np.pi / 2) == pytest.approx(0.5)


def test_free_spectrum_scan_is_multiplier_set():
    from wavelab.operator import spectrum_scan

    g = TorusGrid(16)
    m = np.sort(multiplier(*g.wavenumbers).ravel())
    scan = spectrum_scan(FREE, g, (-0.1, 0.1))
    np.testing.assert_allclose(scan.eigenvalues, m[np.abs(m) < 0.1], atol=1e-14)
    assert np.sum(np.abs(scan.eigenvalues) < 1e-14) >= 16  # every k2 = 0 mode
