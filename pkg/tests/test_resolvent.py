import numpy as np
import pytest

from wavelab.errors import ParameterError, SolverError
from wavelab.operator import FREE, P1, P2
from wavelab.resolvent import ResolventQuery, lap_study, resolve, u_infinity
from wavelab.spectral_core import GridField, TorusGrid, make_bump


@pytest.fixture
def grid32():
    return TorusGrid(32)


@pytest.mark.parametrize("side,sgn", [("PLUS", 1), ("MINUS", -1)])
def test_diagonal_case_exact(grid16, side, sgn):
    f = GridField.from_modes(grid16, {(0, 1): 1.0})
    u = resolve(FREE, 0.1, 0.05, f, side=side)
    assert u.coefficient(0, 1) == pytest.approx(1 / (2**-0.5 - 0.1 - sgn * 0.05j), rel=1e-13)


def test_plus_and_minus_are_adjoint(grid16, rng):
    f = GridField.from_spectral(grid16, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    g = GridField.from_spectral(grid16, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    Rf = resolve(P1, 0.05, 0.1, f, side="PLUS")
    Rg = resolve(P1, 0.05, 0.1, g, side="MINUS")
    assert np.vdot(g.spec, Rf.spec) == pytest.approx(np.vdot(Rg.spec, f.spec), rel=1e-11)


def test_dense_and_iterative_agree(grid32):
    f = make_bump(grid32)
    a = resolve(P1, 0.0, 0.1, f, method="dense")
    b = resolve(P1, 0.0, 0.1, f, method="iterative")
    assert (a - b).l2() <= 1e-8 * a.l2()


def test_first_resolvent_identity(grid32):
    # R(z1) - R(z2) = (z1 - z2) R(z1) R(z2)
    f = make_bump(grid32)
    z1, z2 = 0.05j, 0.1 + 0.05j
    r2 = resolve(P2, 0.1, 0.05, f)
    lhs = resolve(P2, 0.0, 0.05, f) - r2
    rhs = resolve(P2, 0.0, 0.05, r2) * (z1 - z2)
    assert (lhs - rhs).l2() <= 1e-8 * lhs.l2()


def test_gmres_failure_carries_history(grid32):
    f = make_bump(grid32)
    with pytest.raises(SolverError) as exc:
        resolve(P1, 0.0, 0.01, f, method="iterative", restart=5, maxiter=1)
    assert exc.value.history and len(exc.value.history) >= 1


def test_bad_arguments(grid16):
    f = make_bump(grid16)
    with pytest.raises(ParameterError):
        resolve(P1, 0.0, 0.0, f)
    with pytest.raises(ParameterError):
        resolve(P1, 0.0, 0.1, f, method="magic")
    with pytest.raises(ParameterError):
        resolve(P1, 0.0, 0.1, f, side="UP")
    assert resolve(P1, 0.0, 0.1, GridField.zeros(grid16)).l2() == 0


@pytest.mark.parametrize("kw", [
    {"eps_list": []},
    {"eps_list": [0.1, 0.2]},
    {"eps_list": [0.1, 0.1]},
    {"eps_list": [0.1, 5e-5]},
    {"eps_list": [0.1], "omega": 0.4},
])
def test_query_validation(grid16, kw):
    with pytest.raises(ParameterError):
        ResolventQuery(f=make_bump(grid16), **kw)


def test_free_study_converges_linearly(grid16, tmp_path):
    f = GridField.from_modes(grid16, {(0, 1): 1.0, (3, 2): 0.5})
    res = lap_study(FREE, ResolventQuery(f=f, eps_list=[0.2, 0.1, 0.05, 0.025]))
    assert res.cauchy_decreasing()
    ratios = np.array(res.cauchy[:-1]) / np.array(res.cauchy[1:])
    np.testing.assert_allclose(ratios, 2.0, rtol=0.05)
    assert res.passed and max(res.residuals) < 1e-12
    paths = res.write(tmp_path)
    assert paths[0].read_text().splitlines()[0] == "eps,s=-0.6,s=-0.75,s=-1,s=0"
    assert len(paths) == 2 + 4


def test_u_infinity_sign(grid16):
    f = make_bump(grid16)
    out = u_infinity(P2, ResolventQuery(f=f, eps_list=[0.2, 0.1]))
    np.testing.assert_array_equal(out.field.spec, -out.study.limit.spec)


@pytest.mark.slow
def test_limit_matches_long_time_profile():
    # |u(50)| and |u_infinity| along the attracting line x1 = -pi/2; both runs are cached in checks
    from wavelab import checks

    u50 = checks.fig_evolution("p1", 256).snapshot_at(50.0)
    uinf = checks.lap_p1(128).field
    a = np.abs(u50.phys[u50.grid.n * 3 // 4, ::2])
    b = np.abs(uinf.phys[uinf.grid.n * 3 // 4])
    assert u50.grid.x[u50.grid.n * 3 // 4] == pytest.approx(3 * np.pi / 2)
    assert np.corrcoef(a, b)[0, 1] >= 0.8
