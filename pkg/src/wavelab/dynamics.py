"""Rescaled Hamiltonian flow at fiber infinity and its hyperbolic limit cycles.

Coordinates are (x1, x2, theta, r) with xi = e^r (cos theta, sin theta). For
p = xi2/|xi| + V(x) the homogeneous symbol is q(x, theta) = sin(theta) + V(x),
and |xi| H_p becomes

    x1'    = -sin(theta) q_theta        x2' = cos(theta) q_theta
    theta' =  sin(theta) q_x1 - cos(theta) q_x2
    r'     = -(cos(theta) q_x1 + sin(theta) q_x2)

The (x, theta) part does not involve r, and r' integrated over a cycle gives
the radial rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DegenerateCycleError, NumericalBlowupError, ParameterError, SolverError
from .operator import SymbolModel

TWO_PI = 2 * np.pi
ODE_TOL = dict(method="DOP853", rtol=1e-13, atol=1e-13)


def wrap(a):
    """Reduce angles to [0, 2 pi)."""
    return np.mod(a, TWO_PI)


def wrap_centered(a):
    """Reduce angles to [-pi, pi)."""
    return np.mod(np.asarray(a) + np.pi, TWO_PI) - np.pi


def angle_dist(a, b):
    return np.abs(wrap_centered(np.asarray(a) - np.asarray(b)))


@dataclass(frozen=True)
class PhasePoint:
    x1: float
    x2: float
    theta: float
    r: float = 0.0

    def reduced(self) -> "PhasePoint":
        return PhasePoint(float(wrap(self.x1)), float(wrap(self.x2)), float(wrap(self.theta)), self.r)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.theta, self.r])


def symbol_q(model: SymbolModel, x1, x2, theta):
    return np.sin(theta) + model.V(x1, x2)


def field_arrays(model: SymbolModel, y: np.ndarray) -> np.ndarray:
    """Vector field on an array of states with leading axis (x1, x2, theta, r)."""
    x1, x2, th = y[0], y[1], y[2]
    s, c = np.sin(th), np.cos(th)
    v1, v2 = model.grad_V(x1, x2)
    q_th = c
    return np.array([
        -s * q_th,
        c * q_th,
        s * v1 - c * v2,
        -(c * v1 + s * v2),
    ])


def vector_field(model: SymbolModel, p: PhasePoint) -> tuple[float, float, float, float]:
    return tuple(float(v) for v in field_arrays(model, p.as_array()))


def jacobian3(model: SymbolModel, y) -> np.ndarray:
    """Jacobian of the (x1, x2, theta) components with respect to (x1, x2, theta)."""
    x1, x2, th = y[0], y[1], y[2]
    s, c = np.sin(th), np.cos(th)
    v1, v2 = model.grad_V(x1, x2)
    h11, h12, h22 = model.hess_V(x1, x2)
    return np.array([
        [0.0, 0.0, -np.cos(2 * th)],
        [0.0, 0.0, -np.sin(2 * th)],
        [s * h11 - c * h12, s * h12 - c * h22, c * v1 + s * v2],
    ])


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (steps + 1, 4), angles unwrapped

    def points(self) -> list[PhasePoint]:
        return [PhasePoint(*row) for row in self.states]

    @property
    def end(self) -> PhasePoint:
        return PhasePoint(*self.states[-1])


def rk4_states(model: SymbolModel, y0: np.ndarray, t_span: float, dt: float, keep=True):
    """Fixed-step RK4 on states of shape (4, ...); negative t_span runs backward."""
    n = int(round(abs(t_span) / dt))
    h = np.sign(t_span) * dt if n else 0.0
    y = np.array(y0, dtype=float)
    out = [y.copy()] if keep else None
    for i in range(n):
        k1 = field_arrays(model, y)
        k2 = field_arrays(model, y + 0.5 * h * k1)
        k3 = field_arrays(model, y + 0.5 * h * k2)
        k4 = field_arrays(model, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(y).all():
            raise NumericalBlowupError(f"non-finite phase point at step {i + 1}", step=i + 1)
        if keep:
            out.append(y.copy())
    return (np.array(out), h, n) if keep else y


def integrate_flow(model: SymbolModel, p0: PhasePoint, t_span: float, dt: float = 0.01) -> Trajectory:
    if not 0 < dt <= 0.01:
        raise ParameterError(f"flow step must lie in (0, 0.01], got {dt}")
    states, h, n = rk4_states(model, p0.as_array(), t_span, dt)
    return Trajectory(times=h * np.arange(n + 1), states=states)


# -- limit cycles ----------------------------------------------------------


@dataclass
class LimitCycle:
    omega: float
    kind: str  # "SINK" or "SOURCE"
    x1_star: float  # section point on {x2 = 0}, wrapped to [-pi, pi)
    theta_star: float  # wrapped to [0, 2 pi)
    period: float
    tau: np.ndarray = field(default_factory=lambda: np.empty(0))
    states: np.ndarray = field(default_factory=lambda: np.empty((0, 4)))
    beta: np.ndarray = field(default_factory=lambda: np.empty(0))
    int_beta: float = float("nan")
    c1: float = float("nan")
    c2: float = float("nan")  # rho-multiplier exp(-int_beta)
    c1_fd: float = float("nan")

    @property
    def start(self) -> np.ndarray:
        return np.array([self.x1_star, 0.0, self.theta_star, 0.0])

    @property
    def is_sink(self) -> bool:
        return self.kind == "SINK"

    def report(self) -> dict:
        return {
            "kind": self.kind,
            "x1": self.x1_star,
            "theta": self.theta_star,
            "period": self.period,
            "c1": self.c1,
            "c2": self.c2,
            "int_beta": self.int_beta,
        }


def theta_on_sigma(model: SymbolModel, omega: float, x1, x2, cos_sign: float):
    """theta solving sin(theta) + V(x) = omega on the branch with sign(cos theta) = cos_sign."""
    s = omega - model.V(x1, x2)
    if np.any(np.abs(s) > 1):
        raise SolverError(f"x1={x1} is not on Sigma({omega}) (sin theta would be {s})")
    return np.arctan2(s, cos_sign * np.sqrt(np.clip(1 - s * s, 0.0, None)))


def _section_event(direction):
    def ev(t, y):
        return y[1] - direction * TWO_PI

    ev.terminal = True
    ev.direction = direction
    return ev


def _first_return(model: SymbolModel, y0: np.ndarray, backward: bool, t_max: float = 200.0, extra=None):
    """Integrate from the section {x2 = 0} to the next crossing x2 = +-2 pi.

    Returns (state at crossing, crossing time, solve_ivp solution).
    """
    sign = -1.0 if backward else 1.0
    x2dot = field_arrays(model, y0[:4])[1]
    direction = np.sign(x2dot) * sign
    if abs(x2dot) < 1e-6:
        raise SolverError(f"section {{x2 = 0}} not transversal at x1={y0[0]:.6g}, theta={y0[2]:.6g}")
    ev = _section_event(direction)

    def rhs(t, y):
        return extra(t, y) if extra else field_arrays(model, y)

    sol = solve_ivp(rhs, (0.0, sign * t_max), y0, events=ev, dense_output=True, **ODE_TOL)
    if sol.status != 1 or not len(sol.t_events[0]):
        raise SolverError(f"no return to section from x1={y0[0]:.6g}, theta={y0[2]:.6g} within t={t_max}")
    y_end = sol.y_events[0][0]
    end_speed = field_arrays(model, y_end[:4])[1]
    if abs(end_speed) < 1e-6:
        raise SolverError(f"section crossing not transversal (|x2'|={abs(end_speed):.2e}) near x1={y_end[0]:.6g}")
    return y_end, float(sol.t_events[0][0]), sol


def section_map(model: SymbolModel, omega: float, x1: float, cos_sign: float, backward=False):
    """Return map of {x2 = 0} restricted to Sigma(omega), in the x1 coordinate."""
    th = float(theta_on_sigma(model, omega, x1, 0.0, cos_sign))
    y_end, t_ret, _ = _first_return(model, np.array([x1, 0.0, th, 0.0]), backward)
    return x1 + wrap_centered(y_end[0] - x1), abs(t_ret), y_end


def _refine(model: SymbolModel, omega: float, x1_guess: float, theta_guess: float, backward: bool, half=0.05):
    cos_sign = 1.0 if np.cos(theta_guess) >= 0 else -1.0

    def g(x):
        return section_map(model, omega, x, cos_sign, backward)[0] - x

    lo, hi = x1_guess - half, x1_guess + half
    glo, ghi = g(lo), g(hi)
    tries = 0
    while glo * ghi > 0 and tries < 4:
        half *= 2
        lo, hi = x1_guess - half, x1_guess + half
        glo, ghi = g(lo), g(hi)
        tries += 1
    if glo * ghi > 0:
        raise SolverError(f"could not bracket a section fixed point near x1={x1_guess:.6g}")
    x_star = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    _, period, _ = section_map(model, omega, x_star, cos_sign, backward)
    theta = float(wrap(theta_on_sigma(model, omega, x_star, 0.0, cos_sign)))
    if theta > TWO_PI - 1e-10:
        theta = 0.0
    return float(wrap_centered(x_star)), theta, period


def _seeds(model: SymbolModel, omega: float, n_x1: int = 24, x2_values=(0.0, 2.1, 4.2)):
    pts = []
    for x2 in x2_values:
        for x1 in np.linspace(0, TWO_PI, n_x1, endpoint=False) + 0.05:
            s = omega - float(model.V(x1, x2))
            if abs(s) >= 1:
                continue
            for cos_sign in (1.0, -1.0):
                pts.append([x1, x2, float(np.arctan2(s, cos_sign * np.sqrt(1 - s * s))), 0.0])
    return np.array(pts).T


def _project_to_section(model: SymbolModel, y: np.ndarray, backward: bool):
    """Flow y (in the approach direction) to the next x2 in 2 pi Z; section coordinates or None."""
    y = y.copy()
    y[1] = wrap(y[1])
    sign = -1.0 if backward else 1.0
    moving_up = field_arrays(model, y)[1] * sign > 0
    target = TWO_PI if moving_up else 0.0

    def event(t, yy):
        return yy[1] - target

    event.terminal = True
    sol = solve_ivp(lambda t, yy: field_arrays(model, yy), (0.0, sign * 100.0), y, events=event, rtol=1e-10, atol=1e-10)
    if not len(sol.t_events[0]):
        return None
    out = sol.y_events[0][0]
    return float(wrap_centered(out[0])), float(wrap(out[2]))


def find_limit_cycles(
    model: SymbolModel,
    omega: float,
    t_settle: float = 60.0,
    dedup_tol: float = 1e-4,
    with_floquet: bool = True,
    diagnostics: dict | None = None,
) -> list[LimitCycle]:
    """Locate the attracting and repelling cycles of the flow on Sigma(omega).

    Seeds on Sigma(omega) are flowed forward (sinks) and backward (sources),
    clustered on the section {x2 = 0}, and each cluster is refined as a fixed
    point of the section return map.
    """
    if abs(omega) > 0.3:
        raise ParameterError(f"|omega| <= 0.3 required for cycle continuation, got {omega}")
    seeds = _seeds(model, omega)
    if seeds.size == 0:
        if diagnostics is not None:
            diagnostics["reason"] = "Sigma(omega) has no points on the seed lines"
        return []
    cycles: list[LimitCycle] = []
    for backward in (False, True):
        end = rk4_states(model, seeds, -t_settle if backward else t_settle, 0.01, keep=False)
        candidates: list[tuple[float, float]] = []
        for j in range(end.shape[1]):
            proj = _project_to_section(model, end[:, j], backward)
            if proj is None:
                continue
            if not any(angle_dist(proj[0], a) < 1e-3 and angle_dist(proj[1], b) < 1e-3 for a, b in candidates):
                candidates.append(proj)
        for x1g, thg in candidates:
            x1s, ths, period = _refine(model, omega, x1g, thg, backward)
            if any(
                angle_dist(x1s, c.x1_star) < dedup_tol and angle_dist(ths, c.theta_star) < dedup_tol
                for c in cycles
            ):
                continue
            cyc = LimitCycle(
                omega=float(omega),
                kind="SOURCE" if backward else "SINK",
                x1_star=x1s,
                theta_star=ths,
                period=period,
            )
            cycles.append(floquet_analysis(cyc, model) if with_floquet else cyc)
    if not cycles and diagnostics is not None:
        diagnostics["reason"] = "no recurrent orbit found"
    cycles.sort(key=lambda c: (c.kind != "SINK", round(c.x1_star, 6), round(c.theta_star, 6)))
    return cycles


def floquet_analysis(cycle: LimitCycle, model: SymbolModel, n_samples: int = 512, fd_step: float = 1e-3) -> LimitCycle:
    """Monodromy of the (x1, x2, theta) variational system over one period.

    c1 is the section-map multiplier along Sigma(omega); c2 = exp(-int beta)
    is the multiplier of rho = 1/|xi|. A finite-difference derivative of the
    section map (``c1_fd``) is computed as an independent cross-check.
    """
    y0 = cycle.start

    def rhs(t, y):
        f = field_arrays(model, y[:4])
        J = jacobian3(model, y[:3])
        X = y[4:].reshape(3, 3)
        return np.concatenate([f, (J @ X).ravel()])

    Y0 = np.concatenate([y0, np.eye(3).ravel()])
    y_end, period, sol = _first_return(model, Y0, backward=False, extra=rhs)
    if abs(period - cycle.period) > 1e-6:
        raise DegenerateCycleError(
            f"period mismatch on refinement: {period:.12g} vs {cycle.period:.12g} at x1={cycle.x1_star:.6g}"
        )
    M = y_end[4:].reshape(3, 3)
    F = field_arrays(model, y_end[:4])[:3]
    e2 = np.array([0.0, 1.0, 0.0])
    DS = (np.eye(3) - np.outer(F, e2) / F[1]) @ M
    v1, v2 = model.grad_V(y_end[0], y_end[1])
    v = np.array([np.cos(y_end[2]), 0.0, -float(v1)])  # ker dq within the section
    c1 = float(v @ DS @ v / (v @ v))

    tau = np.linspace(0.0, period, n_samples, endpoint=False)
    int_beta = float(y_end[3] - y0[3])
    if cycle.kind == "SOURCE":
        # forward sampling amplifies start-point errors by c1; reverse time contracts them
        _, _, back = _first_return(model, y0, backward=True)
        states = back.sol(tau - period).T
        states[:, 3] += int_beta
    else:
        states = sol.sol(tau)[:4].T
    beta = field_arrays(model, states.T)[3]

    # finite-difference check on the contracting direction of the section map
    cos_sign = 1.0 if np.cos(cycle.theta_star) >= 0 else -1.0
    backward = c1 > 1
    sp, _, _ = section_map(model, cycle.omega, cycle.x1_star + fd_step, cos_sign, backward)
    sm, _, _ = section_map(model, cycle.omega, cycle.x1_star - fd_step, cos_sign, backward)
    d = (sp - sm) / (2 * fd_step)
    c1_fd = 1.0 / d if backward else d
    if abs(np.cos(cycle.theta_star)) < 1e-8:
        c1_fd = float("nan")

    return replace(
        cycle,
        period=period,
        tau=tau,
        states=states,
        beta=beta,
        int_beta=int_beta,
        c1=c1,
        c2=float(np.exp(-int_beta)),
        c1_fd=float(c1_fd),
    )


def classify_consistent(cycle: LimitCycle) -> bool:
    """SINK <=> |c1| < 1 and int beta > 0; SOURCE <=> |c1| > 1 and int beta < 0."""
    if cycle.kind == "SINK":
        return abs(cycle.c1) < 1 and cycle.int_beta > 0
    return abs(cycle.c1) > 1 and cycle.int_beta < 0


def cycle_report(model: SymbolModel, omega: float, cycles: list[LimitCycle]) -> dict:
    return {"model": model.name, "omega": omega, "cycles": [c.report() for c in cycles]}


def min_field_speed_on_sigma(model: SymbolModel, omega: float, n: int = 100) -> float:
    """Minimum |(x1', x2', theta')| over an n x n sample of Sigma(omega) (both theta branches)."""
    x = np.linspace(0, TWO_PI, n, endpoint=False)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    s = omega - model.V(X1, X2)
    ok = np.abs(s) <= 1
    best = np.inf
    for cs in (1.0, -1.0):
        th = np.arctan2(s[ok], cs * np.sqrt(np.clip(1 - s[ok] ** 2, 0, None)))
        F = field_arrays(model, np.array([X1[ok], X2[ok], th, np.zeros_like(th)]))
        speed = np.sqrt(F[0] ** 2 + F[1] ** 2 + F[2] ** 2)
        if speed.size:
            best = min(best, float(speed.min()))
    return best


def distance_to_cycle(point: np.ndarray, cycle: LimitCycle) -> float:
    """Distance on the (x1, x2, theta) torus from a point to the sampled cycle."""
    d = angle_dist(cycle.states[:, :3], np.asarray(point)[:3])
    return float(np.min(np.sqrt((d**2).sum(axis=1))))


def sink_attraction(model: SymbolModel, omega: float, cycles: list[LimitCycle], t: float = 40.0, n_x1: int = 24):
    """Largest distance to the nearest sink after flowing seeds (off the sources) for time t."""
    sinks = [c for c in cycles if c.is_sink]
    sources = [c for c in cycles if not c.is_sink]
    seeds = _seeds(model, omega, n_x1=n_x1)
    keep = [j for j in range(seeds.shape[1]) if all(distance_to_cycle(seeds[:, j], s) > 1e-2 for s in sources)]
    seeds = seeds[:, keep]
    end = rk4_states(model, seeds, t, 0.01, keep=False)
    dists = [min(distance_to_cycle(end[:, j], s) for s in sinks) for j in range(end.shape[1])]
    return float(max(dists)), len(dists)
