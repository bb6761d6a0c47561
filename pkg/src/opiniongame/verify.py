"""Independent certification of candidate equilibria.

Costs are integrated two algebraically equivalent ways (termwise and as a
quadratic form), best responses are computed by direct transcription of the
single-agent problem with rivals frozen, and random smooth control
deviations probe the no-profitable-deviation property directly.

Transcription scheme: the control is a piecewise-linear interpolant of its
grid values, the state is its exact integral (composite trapezoid), the
coupling and stubbornness terms are integrated with composite Simpson
weights at the nodes, and the control energy is the exact integral of the
squared interpolant.  Weighting the pointwise control energy with Simpson
weights instead would make the discrete problem inconsistent: the
alternating 4/3, 2/3 weights let the optimizer park extra control effort on
the cheap nodes at no state cost, and the discrete minimum then sits a
grid-independent O(1) below the continuous one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .network import InfluenceNetwork, build_matrices
from .solver import EquilibriumTrajectory


@dataclass(frozen=True)
class CostBreakdown:
    """Agent cost split into its three integrand terms."""

    agent: int
    influence_term: float
    stubbornness_term: float
    control_term: float

    @property
    def total(self) -> float:
        return self.influence_term + self.stubbornness_term + self.control_term


@dataclass(frozen=True)
class BestResponseResult:
    """Transcribed best response of one agent against frozen rivals.

    gap is the candidate's own transcribed cost minus the best-response
    cost; the candidate control is a feasible point of the same quadratic
    program, so the gap cannot be meaningfully negative.
    """

    agent: int
    control: np.ndarray
    trajectory: np.ndarray
    cost: float
    gap: float
    gradient_norm: float


@dataclass(frozen=True)
class StationarityReport:
    """Residuals of the four first-order optimality conditions for one agent."""

    agent: int
    control_residual: float      # max |u + p|
    control_tol: float
    costate_residual: float      # central-difference dp/dt vs -dH/dx
    costate_tol: float
    initial_residual: float      # |x(0) - x0|
    initial_tol: float
    transversality_residual: float  # |p(T)|
    transversality_tol: float

    @property
    def passed(self) -> bool:
        return (self.control_residual <= self.control_tol
                and self.costate_residual <= self.costate_tol
                and self.initial_residual <= self.initial_tol
                and self.transversality_residual <= self.transversality_tol)


def simpson_weights(m: int, h: float) -> np.ndarray:
    """Composite Simpson weights for m uniformly spaced samples (m odd)."""
    if m < 3 or m % 2 == 0:
        raise ValueError("Simpson quadrature needs an odd sample count >= 3")
    s = np.ones(m)
    s[1:-1:2] = 4.0
    s[2:-1:2] = 2.0
    return s * (h / 3.0)


def _grid_step(grid):
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 3:
        raise ValueError("grid too coarse for quadrature")
    h = grid[1] - grid[0]
    if not np.allclose(np.diff(grid), h, rtol=0, atol=1e-12 * max(1.0, abs(grid[-1]))):
        raise ValueError("quadrature requires a uniform grid")
    return float(h)


def cumulative_trapezoid_matrix(m: int, h: float) -> np.ndarray:
    """Lower-triangular map from control samples to their running integral."""
    L = np.zeros((m, m))
    for j in range(1, m):
        L[j, 0] = h / 2.0
        L[j, 1:j] = h
        L[j, j] = h / 2.0
    return L


def _pwl_energy_matrix(m: int, h: float) -> np.ndarray:
    """M with u' M u / 2 = exact integral of the squared piecewise-linear u."""
    M = np.zeros((m, m))
    d = np.full(m, 2.0 * h / 3.0)
    d[0] = d[-1] = h / 3.0
    idx = np.arange(m)
    M[idx, idx] = d
    M[idx[:-1], idx[:-1] + 1] = h / 6.0
    M[idx[:-1] + 1, idx[:-1]] = h / 6.0
    return M


def evaluate_cost(net: InfluenceNetwork, traj: EquilibriumTrajectory, i: int) -> CostBreakdown:
    """Composite-Simpson quadrature of agent i's three cost terms."""
    h = _grid_step(traj.grid)
    s = simpson_weights(len(traj.grid), h)
    xi = traj.x[:, i]
    influence = np.zeros(len(xi))
    for (a, j), w in net.edges.items():
        if a == i:
            influence += w * (xi - traj.x[:, j]) ** 2
    stubborn = net.k[i] * (xi - net.x0[i]) ** 2
    control = traj.u[:, i] ** 2
    return CostBreakdown(
        agent=i,
        influence_term=0.5 * float(s @ influence),
        stubbornness_term=0.5 * float(s @ stubborn),
        control_term=0.5 * float(s @ control),
    )


def quadratic_cost(net: InfluenceNetwork, traj: EquilibriumTrajectory, i: int) -> float:
    """Same cost as evaluate_cost, via the stacked quadratic form.

    z_i(t) collects the pairwise differences to every other agent plus the
    drift from the initial opinion; the cost is
    (1/2) int z_i' G_i z_i + u_i^2 dt with G_i = diag(w_i1 .. w_in, k_i).
    Serves as an independent second formula for the same number.
    """
    h = _grid_step(traj.grid)
    s = simpson_weights(len(traj.grid), h)
    n = traj.n
    others = [j for j in range(n) if j != i]
    G = np.zeros(len(others) + 1)
    for col, j in enumerate(others):
        G[col] = net.edges.get((i, j), 0.0)
    G[-1] = net.k[i]
    total = 0.0
    for row in range(len(traj.grid)):
        z = np.empty(len(others) + 1)
        z[:-1] = traj.x[row, i] - traj.x[row, others]
        z[-1] = traj.x[row, i] - net.x0[i]
        total += s[row] * (z @ (G * z) + traj.u[row, i] ** 2)
    return 0.5 * float(total)


class _Transcription:
    """Quadratic model of agent i's problem with the rivals frozen.

    J(u) = sum_j s_j [q_i x_j^2 / 2 - b_j x_j + c_j] + u' M u / 2 with
    x = x0_i + L u, b the frozen neighbor forcing and c the constant part,
    so J equals the agent's full cost, not just the variable piece.
    """

    def __init__(self, net, traj, i):
        grid = traj.grid
        h = _grid_step(grid)
        m = len(grid)
        self.i = i
        self.s = simpson_weights(m, h)
        self.L = cumulative_trapezoid_matrix(m, h)
        self.M = _pwl_energy_matrix(m, h)
        gm = build_matrices(net)
        self.q = float(gm.q[i])
        self.x0i = float(net.x0[i])
        b = np.full(m, net.k[i] * net.x0[i])
        c = np.full(m, 0.5 * net.k[i] * net.x0[i] ** 2)
        for (a, j), w in net.edges.items():
            if a == i:
                b += w * traj.x[:, j]
                c += 0.5 * w * traj.x[:, j] ** 2
        self.b = b
        self.c = c

    def state(self, u):
        return self.x0i + self.L @ u

    def cost(self, u):
        x = self.state(u)
        state_part = self.s @ (0.5 * self.q * x * x - self.b * x + self.c)
        return float(state_part + 0.5 * u @ (self.M @ u))

    def gradient(self, u):
        x = self.state(u)
        return self.L.T @ (self.s * (self.q * x - self.b)) + self.M @ u

    def minimize(self):
        H = self.M + self.q * (self.L.T * self.s) @ self.L
        rhs = self.L.T @ (self.s * (self.b - self.q * self.x0i))
        u = scipy.linalg.solve(H, rhs, assume_a="pos")
        # one refinement step keeps the optimality residual at roundoff
        u -= scipy.linalg.solve(H, self.gradient(u), assume_a="pos")
        return u


def best_response(net: InfluenceNetwork, traj: EquilibriumTrajectory, i: int,
                  grad_tol=1e-10) -> BestResponseResult:
    """Minimize agent i's transcribed cost against the frozen rivals in traj.

    The objective is a strictly convex quadratic in the sampled control, so
    the minimizer comes from one positive-definite solve; the gradient norm
    is reported and checked against grad_tol.
    """
    model = _Transcription(net, traj, i)
    u = model.minimize()
    gnorm = float(np.linalg.norm(model.gradient(u)))
    scale = max(1.0, float(np.linalg.norm(model.b)))
    if gnorm > grad_tol * scale:
        raise RuntimeError(
            f"best-response solve did not reach stationarity for agent {i + 1}: "
            f"gradient norm {gnorm:.3e} after refinement")
    cost = model.cost(u)
    gap = model.cost(traj.u[:, i]) - cost
    return BestResponseResult(agent=i, control=u, trajectory=model.state(u),
                              cost=cost, gap=gap, gradient_norm=gnorm)


def nash_residual(net: InfluenceNetwork, traj: EquilibriumTrajectory, m=None) -> float:
    """Worst relative best-response improvement over all agents.

    Zero (up to discretization) certifies the open-loop Nash property: no
    agent can lower its own cost while the others keep their trajectories.
    """
    if m is not None and m != len(traj.grid):
        raise ValueError(f"trajectory has {len(traj.grid)} samples, expected m={m}")
    worst = 0.0
    for i in range(traj.n):
        res = best_response(net, traj, i)
        candidate_cost = res.cost + res.gap
        worst = max(worst, res.gap / max(1.0, candidate_cost))
    return worst


def stationarity_check(net: InfluenceNetwork, traj: EquilibriumTrajectory, *,
                       control_tol=1e-12, boundary_tol=1e-8) -> list[StationarityReport]:
    """First-order optimality residuals per agent.

    The costate equation is checked with central differences; its tolerance
    is the truncation bound (h^2/6) max |p'''| with p''' = W(K x0 - W x)
    evaluated along the trajectory, padded by a small safety factor.
    """
    gm = build_matrices(net)
    grid = traj.grid
    h = _grid_step(grid)
    x, p, u = traj.x, traj.p, traj.u
    # dp/dt = -W x + K x0; third derivative of p is W (dp/dt)
    pdot = -x @ gm.W.T + gm.k * net.x0
    p3 = pdot @ gm.W.T
    dp = (p[2:] - p[:-2]) / (2.0 * h)
    costate_resid = np.max(np.abs(dp - pdot[1:-1]), axis=0)
    costate_tol = 2.0 * (h * h / 6.0) * np.max(np.abs(p3), axis=0) + 1e-9
    reports = []
    for i in range(traj.n):
        reports.append(StationarityReport(
            agent=i,
            control_residual=float(np.max(np.abs(u[:, i] + p[:, i]))),
            control_tol=control_tol,
            costate_residual=float(costate_resid[i]),
            costate_tol=float(costate_tol[i]),
            initial_residual=float(abs(x[0, i] - net.x0[i])),
            initial_tol=0.0,
            transversality_residual=float(abs(p[-1, i])),
            transversality_tol=boundary_tol,
        ))
    return reports


def deviation_test(net: InfluenceNetwork, traj: EquilibriumTrajectory, i: int,
                   count: int, seed: int, *,
                   amplitudes=(1e-3, 1e-2, 1e-1), tol=1e-9):
    """Monte-Carlo probe of the no-profitable-deviation property for agent i.

    Draws `count` band-limited perturbations (random low-order Fourier sums,
    normalized to unit sup norm), applies each at every amplitude relative
    to |u_i|_inf + 1, and recomputes the transcribed cost with rivals
    frozen.  Returns (passed, worst_gain) where worst_gain is the largest
    cost reduction any perturbation achieved; passing means no reduction
    beyond tol.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    model = _Transcription(net, traj, i)
    u_base = traj.u[:, i]
    base_cost = model.cost(u_base)
    rng = np.random.default_rng(seed)
    tgrid = traj.grid / traj.T
    n_modes = 6
    scale = float(np.max(np.abs(u_base))) + 1.0
    worst_gain = 0.0
    for _ in range(count):
        coef_sin = rng.standard_normal(n_modes)
        coef_cos = rng.standard_normal(n_modes)
        delta = np.zeros(len(tgrid))
        for mode in range(1, n_modes + 1):
            delta += coef_sin[mode - 1] * np.sin(np.pi * mode * tgrid)
            delta += coef_cos[mode - 1] * np.cos(np.pi * mode * tgrid)
        peak = np.max(np.abs(delta))
        if peak == 0.0:
            continue
        delta /= peak
        for amp in amplitudes:
            gain = base_cost - model.cost(u_base + (amp * scale) * delta)
            worst_gain = max(worst_gain, gain)
    return worst_gain <= tol, worst_gain
