import numpy as np
import pytest

from wavelab.dynamics import (
    angle_dist,
    classify_consistent,
    find_limit_cycles,
    min_field_speed_on_sigma,
    sink_attraction,
    wrap_centered,
)
from wavelab.errors import ParameterError
from wavelab.operator import P1, P2


@pytest.fixture(scope="module")
def p1_cycles():
    return find_limit_cycles(P1, 0.0)


def test_p1_four_cycles(p1_cycles):
    kinds = sorted(c.kind for c in p1_cycles)
    assert kinds == ["SINK", "SINK", "SOURCE", "SOURCE"]
    sinks = {(round(c.x1_star, 8), round(c.theta_star, 8)) for c in p1_cycles if c.is_sink}
    assert sinks == {(round(-np.pi / 2, 8), 0.0), (round(np.pi / 2, 8), round(np.pi, 8))}
    for c in p1_cycles:
        assert c.period == pytest.approx(2 * np.pi, rel=1e-9)
        assert classify_consistent(c)


def test_floquet_matches_closed_form(p1_cycles):
    # on x1 = const the rho-multiplier and section multiplier are both exp(-2 pi |V'|)
    for c in p1_cycles:
        target = 2 * np.pi * abs(2 * np.sin(c.x1_star))
        assert abs(c.int_beta) == pytest.approx(target, rel=1e-9)
        assert c.c2 == pytest.approx(np.exp(-c.int_beta), rel=1e-12)
        assert np.log(c.c1) == pytest.approx(-c.int_beta, rel=1e-6)


@pytest.mark.parametrize("model,omega,x1", [
    (P1, 0.2, -np.arccos(-0.1)),
    (P1, -0.2, -np.arccos(0.1)),
    (P2, 0.2, -np.arccos(-0.4)),
    (P2, -0.2, -np.arccos(0.4)),
])
def test_cycle_positions_track_level_set(model, omega, x1):
    cycles = find_limit_cycles(model, omega, with_floquet=False)
    sink = next(c for c in cycles if c.is_sink and c.theta_star == pytest.approx(0, abs=1e-9))
    assert sink.x1_star == pytest.approx(x1, abs=1e-8)
    assert x1 == pytest.approx({(-0.1): -1.670963748, 0.1: -1.470628906, -0.4: -1.982313173, 0.4: -1.159279481}[round(np.cos(x1), 1)], abs=1e-9)


def test_p2_weaker_contraction():
    c = next(c for c in find_limit_cycles(P2, 0.0) if c.is_sink)
    assert c.c1 == pytest.approx(np.exp(-np.pi), rel=1e-6)


def test_sinks_attract(p1_cycles):
    d, count = sink_attraction(P1, 0.0, p1_cycles, t=40.0, n_x1=12)
    # distances are measured to 512 samples of the cycle, so half a sample gap is the floor
    assert count > 0 and d < 1e-2


def test_no_equilibria_on_sigma():
    assert min_field_speed_on_sigma(P1, 0.0, n=60) > 0.1


def test_omega_out_of_range():
    with pytest.raises(ParameterError):
        find_limit_cycles(P1, 0.31)


def test_angle_helpers():
    assert angle_dist(0.1, 2 * np.pi - 0.1) == pytest.approx(0.2)
    assert wrap_centered(np.pi) == pytest.approx(-np.pi)


def test_field_values():
    from wavelab.dynamics import PhasePoint, vector_field

    np.testing.assert_allclose(vector_field(P1, PhasePoint(0, 0, np.pi / 2)), 0, atol=1e-15)
    np.testing.assert_allclose(vector_field(P2, PhasePoint(np.pi / 2, 0, np.pi)), (0, 1, 0, 0.5), atol=1e-15)


def test_flow_on_sink_cycle():
    from wavelab.dynamics import PhasePoint, integrate_flow

    tr = integrate_flow(P1, PhasePoint(-np.pi / 2, 0, 0), 2 * np.pi, dt=2 * np.pi / 1000)
    x1, x2, th, r = tr.states[-1]
    assert abs(x1 + np.pi / 2) < 1e-8 and abs(th) < 1e-8
    assert x2 == pytest.approx(2 * np.pi) and r == pytest.approx(4 * np.pi)


def test_symbol_conserved(rng):
    from wavelab.dynamics import rk4_states, symbol_q

    y0 = np.vstack([rng.uniform(0, 2 * np.pi, (3, 20)), np.zeros((1, 20))])
    y1 = rk4_states(P1, y0, 5.0, 0.005, keep=False)
    q0, q1 = symbol_q(P1, *y0[:3]), symbol_q(P1, *y1[:3])
    assert np.max(np.abs(q1 - q0)) <= 1e-8


def test_sources_are_reciprocal(p1_cycles):
    sink = next(c for c in p1_cycles if c.is_sink)
    for src in (c for c in p1_cycles if not c.is_sink):
        assert src.c1 * sink.c1 == pytest.approx(1, rel=1e-4)
        assert src.c2 * sink.c2 == pytest.approx(1, rel=1e-4)
