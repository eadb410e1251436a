import hypothesis as hyp
import hypothesis.strategies as st
import numpy as np
import numpy.testing as npt
import pytest

from wavelab.errors import CapacityError, ParameterError
from wavelab.evolution import (
    EvolutionConfig,
    SpectralOracle,
    evolve_rk4,
    evolve_spectral_oracle,
    phi_t,
    read_norm_csv,
    smooth_window,
)
from wavelab.operator import FREE, P1, multiplier
from wavelab.spectral_core import GridField, TorusGrid, make_bump, read_field


@hyp.given(st.floats(-5, 5), st.floats(0, 20))
def test_phi_t_closed_form(lam, t):
    hyp.assume(lam == 0 or abs(lam) > 1e-200)  # the reference formula overflows on subnormals
    expected = -1j * t if lam == 0 else np.expm1(-1j * lam * t) / lam
    assert phi_t(np.array([lam]), t)[0] == pytest.approx(expected, abs=1e-12 * (1 + t))


def test_phi_t_small_lambda_continuous():
    assert phi_t(np.array([1e-14]), 3.0)[0] == pytest.approx(-3j, abs=1e-12)
    assert phi_t(np.array([0.0]), 3.0)[0] == -3j


def test_free_single_mode_exact():
    g = TorusGrid(16)
    f = GridField.from_modes(g, {(2, 3): 1.0})
    trace = evolve_rk4(FREE, f, EvolutionConfig(t_final=5.0, dt=0.01))
    lam = float(multiplier(2, 3))
    assert trace.final.coefficient(2, 3) == pytest.approx((np.exp(-1j * lam * 5) - 1) / lam, abs=1e-9)


def test_rk4_matches_oracle_small_grid():
    g = TorusGrid(16)
    f = make_bump(g)
    trace = evolve_rk4(P1, f, EvolutionConfig(t_final=4.0, dt=0.005))
    ref = evolve_spectral_oracle(P1, f, 4.0)
    assert (trace.final - ref).l2() <= 1e-9 * ref.l2()


def test_gauge_shift():
    # w = e^{-i w0 t} u_shift solves (i d_t - P) w = e^{-i w0 t} f when u_shift solves it for P - w0
    g = TorusGrid(16)
    f = make_bump(g)
    w0, t = 0.17, 3.0
    u_shift = evolve_spectral_oracle(P1.shifted(w0), f, t)
    orc = SpectralOracle(P1, g)
    # Duhamel for the modulated forcing: -i int_0^t e^{-i(t-s)lam} e^{-i w0 s} ds
    # which integrates to e^{-i lam t} phi_t(w0 - lam)
    w = orc.apply(np.exp(-1j * orc.lam * t) * phi_t(w0 - orc.lam, t), f)
    npt.assert_allclose(np.exp(-1j * w0 * t) * u_shift.spec, w.spec, atol=1e-12)


def test_oracle_capacity():
    with pytest.raises(CapacityError):
        SpectralOracle(P1, TorusGrid(64))


def test_norms_grow_linearly_for_free_zero_mode():
    g = TorusGrid(16)
    f = GridField.from_modes(g, {(1, 0): 1.0})  # m = 0 on k2 = 0
    trace = evolve_rk4(FREE, f, EvolutionConfig(t_final=3.0, dt=0.01, norm_exponents=[0.0]))
    npt.assert_allclose(trace.norm_series(0.0), trace.times, rtol=1e-12, atol=1e-14)


def test_smooth_window_shape():
    lam = np.linspace(-1, 1, 401)
    w = smooth_window(lam, 0.0, 0.3)
    assert np.all(w[np.abs(lam) <= 0.15] == 1.0)
    assert np.all(w[np.abs(lam) >= 0.3] == 0.0)
    assert np.all((w >= 0) & (w <= 1))


def test_snapshots_and_csv(tmp_path):
    g = TorusGrid(16)
    cfg = EvolutionConfig(t_final=1.0, dt=0.01, snapshot_times=[0.5, 1.0], norm_every=0.25)
    trace = evolve_rk4(P1, make_bump(g), cfg, snapshot_dir=tmp_path)
    assert [t for t, _ in trace.snapshots] == pytest.approx([0.5, 1.0])
    npt.assert_array_equal(read_field(trace.snapshots[-1][1]).spec, trace.final.spec)
    trace.write_csv(tmp_path / "norms.csv")
    t, ex, norms = read_norm_csv(tmp_path / "norms.csv")
    npt.assert_allclose(t, [0, 0.25, 0.5, 0.75, 1.0])
    assert ex == [-0.75, 0.0, 0.25]
    npt.assert_array_equal(norms, trace.norms)


@pytest.mark.parametrize("kw", [
    {"t_final": -1},
    {"t_final": 1, "dt": 0.1},
    {"t_final": 1, "dt": 0},
    {"t_final": 1, "snapshot_times": [0.5, 0.2]},
    {"t_final": 1, "snapshot_times": [2.0]},
    {"t_final": 1, "norm_every": 0},
])
def test_config_validation(kw):
    with pytest.raises(ParameterError):
        EvolutionConfig(**kw)


def test_step_halving_is_fourth_order():
    g = TorusGrid(16)
    f = make_bump(g)
    ref = evolve_spectral_oracle(P1, f, 10.0)
    errs = [(evolve_rk4(P1, f, EvolutionConfig(t_final=10.0, dt=dt)).final - ref).l2() for dt in (0.05, 0.025, 0.0125)]
    for a, b in zip(errs, errs[1:]):
        assert 14 <= a / b <= 18


def test_free_mode_at_t10():
    g = TorusGrid(16)
    f = GridField.from_modes(g, {(0, 1): 1.0})
    u = evolve_rk4(FREE, f, EvolutionConfig(t_final=10.0, dt=0.005)).final
    lam = 2**-0.5
    exact = (np.exp(-1j * lam * 10) - 1) / lam
    assert abs(u.coefficient(0, 1) - exact) <= 1e-8 * abs(exact)


def test_zero_forcing_and_zero_mode_growth():
    g = TorusGrid(16)
    assert evolve_rk4(P1, GridField.zeros(g), EvolutionConfig(t_final=1.0)).final.l2() == 0
    u = evolve_spectral_oracle(FREE, GridField.from_modes(g, {(1, 0): 1.0}), 7.0)
    assert u.coefficient(1, 0) == pytest.approx(-7j, abs=1e-12)


def test_oracle_linearity(rng):
    g = TorusGrid(16)
    orc = SpectralOracle(P1, g)
    f1 = make_bump(g)
    f2 = GridField.from_spectral(g, rng.standard_normal((16, 16)) + 0j)
    lhs = orc.solution(f1 + f2, 3.0)
    rhs = orc.solution(f1, 3.0) + orc.solution(f2, 3.0)
    assert (lhs - rhs).l2() <= 1e-12 * lhs.l2()


def test_filtered_extremes():
    from wavelab.evolution import evolve_filtered

    g = TorusGrid(16)
    f = make_bump(g)
    cfg = EvolutionConfig(t_final=2.0)
    full = evolve_filtered(P1, f, cfg, 0.0, 10.0)
    assert (full.final - evolve_rk4(P1, f, cfg).final).l2() <= 1e-9 * full.final.l2()
    assert evolve_filtered(P1, f, cfg, 5.0, 0.1).final.l2() == 0


def test_filtered_solution_stays_bounded():
    # forcing localized near energy 0: H^-3/4 norm stays in a band
    from wavelab.evolution import evolve_filtered

    g = TorusGrid(24)
    cfg = EvolutionConfig(t_final=100.0, dt=0.02, norm_exponents=[-0.75])
    tr = evolve_filtered(P1, make_bump(g), cfg, 0.0, 0.2)
    h = tr.norm_series(-0.75)[np.array(tr.times) >= 20]
    assert h.max() / h.min() <= 2
