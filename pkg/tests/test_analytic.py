"""Tests for the closed-form trajectories, limits and consensus metrics."""

import numpy as np
import pytest

from conftest import X0_LADDER, complete_uniform_net
from opiniongame.analytic import (CompleteUniformParams, LeaderParams,
                                  complete_limit, complete_pairwise_distance,
                                  complete_params, complete_trajectory,
                                  epsilon_consensus_time, gamma,
                                  leader_consensus_time, leader_distance,
                                  leader_limit, leader_params,
                                  leader_row_weights, leader_trajectory)
from opiniongame.solver import solve_equilibrium

FIG1B = CompleteUniformParams(n=10, w=2.0, k=0.2, T=5.0)


def gamma_reference(n, w, k, T, t):
    """Direct high-precision evaluation of the shrink factor."""
    import mpmath
    mpmath.mp.dps = 40
    lam = mpmath.mpf(k) + n * mpmath.mpf(w)
    s = mpmath.sqrt(lam)
    val = k / lam + (n * w / lam) * mpmath.cosh(s * (T - t)) / mpmath.cosh(s * T)
    return float(val)


def test_gamma_boundary_is_one():
    assert gamma(FIG1B, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_gamma_no_coupling_is_constant_one():
    p = CompleteUniformParams(n=5, w=0.0, k=0.7, T=3.0)
    for t in (0.0, 1.0, 3.0):
        assert gamma(p, t) == pytest.approx(1.0, abs=1e-14)


def test_gamma_reference_values():
    for t in (0.0, 1.3, 2.5, 5.0):
        assert gamma(FIG1B, t) == pytest.approx(
            gamma_reference(10, 2.0, 0.2, 5.0, t), rel=1e-13)


def test_gamma_strictly_decreasing_within_unit_interval():
    ts = np.linspace(0.0, FIG1B.T, 50)
    vals = np.array([gamma(FIG1B, t) for t in ts])
    assert np.all(vals > 0.0) and np.all(vals <= 1.0)
    assert np.all(np.diff(vals) < 0.0)


def test_gamma_overflow_safe_for_long_horizons():
    p = CompleteUniformParams(n=10, w=2.0, k=0.2, T=5000.0)
    val = gamma(p, 2500.0)
    assert np.isfinite(val)
    assert val == pytest.approx(p.k / p.lambda1, rel=1e-12)


def test_gamma_shrinks_with_scaled_rates():
    # scaling k and n w together keeps k/lambda1 but speeds convergence
    t = 1.0
    vals = []
    for scale in (1.0, 2.0, 4.0, 8.0):
        p = CompleteUniformParams(n=10, w=2.0 * scale, k=0.2 * scale, T=5.0)
        vals.append(gamma(p, t))
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_degenerate_params_rejected():
    with pytest.raises(ValueError):
        CompleteUniformParams(n=4, w=0.0, k=0.0, T=1.0)


def test_complete_trajectory_boundary_and_consensus():
    x0 = np.array([0.2, 0.4, 0.9])
    p = CompleteUniformParams(n=3, w=1.0, k=0.5, T=2.0)
    np.testing.assert_allclose(complete_trajectory(p, x0, 0.0), x0, atol=1e-14)
    same = np.full(3, 0.6)
    for t in (0.0, 1.0, 2.0):
        np.testing.assert_allclose(complete_trajectory(p, same, t), same, atol=1e-15)


def test_complete_trajectory_preserves_mean():
    x0 = np.array([0.05, 0.3, 0.55, 0.8, 0.97])
    p = CompleteUniformParams(n=5, w=1.7, k=0.3, T=4.0)
    for t in np.linspace(0, 4.0, 9):
        out = complete_trajectory(p, x0, t)
        assert out.mean() == pytest.approx(x0.mean(), abs=1e-12)


def test_complete_trajectory_matches_solver(fig1b_net):
    traj = solve_equilibrium(fig1b_net, 201)
    p = complete_params(fig1b_net)
    ref = np.array([complete_trajectory(p, fig1b_net.x0, t) for t in traj.grid])
    assert np.max(np.abs(ref - traj.x)) <= 1e-8


def test_complete_limit_values():
    x0 = X0_LADDER
    # no stubbornness: exact average consensus
    p0 = CompleteUniformParams(n=10, w=2.0, k=0.0, T=5.0)
    np.testing.assert_allclose(complete_limit(p0, x0), x0.mean(), atol=1e-15)
    # no coupling: nobody moves
    pw = CompleteUniformParams(n=10, w=0.0, k=0.3, T=5.0)
    np.testing.assert_allclose(complete_limit(pw, x0), x0, atol=1e-15)
    # strong-coupling ladder instance
    lim = complete_limit(FIG1B, x0)
    np.testing.assert_allclose(lim, x0.mean() + (0.2 / 20.2) * (x0 - x0.mean()),
                               atol=1e-15)


def test_complete_limit_agrees_with_long_horizon_solver():
    # T = 50 makes cosh(sqrt(lambda) T) ~ 1e97; the spectral route handles it
    net = complete_uniform_net(10, 2.0, 0.2, X0_LADDER, 50.0)
    traj = solve_equilibrium(net, 101)
    lim = complete_limit(complete_params(net), net.x0)
    assert np.max(np.abs(traj.x[-1] - lim)) <= 1e-10


def test_pairwise_distance():
    assert complete_pairwise_distance(FIG1B, 0.4, 0.4, 1.0) == 0.0
    assert complete_pairwise_distance(FIG1B, 0.1, 0.7, 0.0) == pytest.approx(0.6)
    traj = solve_equilibrium(
        complete_uniform_net(10, 2.0, 0.2, X0_LADDER, 5.0), 201)
    mid = 100
    measured = abs(traj.x[mid, 0] - traj.x[mid, 7])
    predicted = complete_pairwise_distance(FIG1B, X0_LADDER[0], X0_LADDER[7],
                                           traj.grid[mid])
    assert measured == pytest.approx(predicted, abs=1e-8)


def test_pairwise_distance_non_increasing():
    ts = np.linspace(0, 5.0, 40)
    vals = [complete_pairwise_distance(FIG1B, 0.05, 0.95, t) for t in ts]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_epsilon_consensus_immediate_when_eps_large():
    assert epsilon_consensus_time(FIG1B, X0_LADDER, 0.5) == 0.0


def test_epsilon_consensus_unreachable_below_stubborn_floor():
    floor = (FIG1B.k / FIG1B.lambda1) * 0.45  # max deviation from the mean
    assert epsilon_consensus_time(FIG1B, X0_LADDER, 0.9 * floor) is None


def test_epsilon_consensus_matches_grid_scan():
    eps = 0.1
    t_star = epsilon_consensus_time(FIG1B, X0_LADDER, eps)
    traj = solve_equilibrium(
        complete_uniform_net(10, 2.0, 0.2, X0_LADDER, 5.0), 2001)
    dev = np.max(np.abs(traj.x - X0_LADDER.mean()), axis=1)
    scan = traj.grid[np.argmax(dev <= eps)]
    h = traj.grid[1] - traj.grid[0]
    assert abs(t_star - scan) <= h


# ---------------------------------------------------------------------------
# single-leader topology


def heterogeneous_leader():
    k = np.array([0.4, 0.0, 0.6, 1.1, 0.25])
    w1 = np.array([0.0, 2.0, 0.9, 1.4, 2.7])
    return LeaderParams(k=k, w1=w1, T=4.0)


def test_leader_trajectory_boundary():
    p = heterogeneous_leader()
    x0 = np.array([0.1, 0.35, 0.5, 0.75, 0.9])
    np.testing.assert_allclose(leader_trajectory(p, x0, 0.0), x0, atol=1e-13)


def test_leader_never_moves():
    p = heterogeneous_leader()
    x0 = np.array([0.1, 0.35, 0.5, 0.75, 0.9])
    for t in np.linspace(0, p.T, 7):
        assert leader_trajectory(p, x0, t)[0] == x0[0]


def test_nonstubborn_follower_joins_leader_on_long_horizons():
    p = LeaderParams(k=np.array([0.5, 0.0]), w1=np.array([0.0, 1.5]), T=60.0)
    x0 = np.array([0.2, 0.9])
    out = leader_trajectory(p, x0, p.T)
    assert abs(out[1] - x0[0]) < 1e-9


def test_leader_trajectory_matches_solver(fig2b_net):
    traj = solve_equilibrium(fig2b_net, 201)
    p = leader_params(fig2b_net)
    ref = np.array([leader_trajectory(p, fig2b_net.x0, t) for t in traj.grid])
    assert np.max(np.abs(ref - traj.x)) <= 1e-8


def test_leader_row_weights_equivalent_form():
    # x_i = rho_i x0_1 + sigma_i x0_i must reproduce the direct formula,
    # and the weights always sum to one
    p = heterogeneous_leader()
    x0 = np.array([0.1, 0.35, 0.5, 0.75, 0.9])
    for t in np.linspace(0, p.T, 9):
        direct = leader_trajectory(p, x0, t)
        for i in range(1, p.n):
            rho, sigma = leader_row_weights(p, i, t)
            assert rho + sigma == pytest.approx(1.0, abs=1e-12)
            assert rho * x0[0] + sigma * x0[i] == pytest.approx(direct[i], abs=1e-12)


def test_leader_limit_cases():
    x0 = np.array([0.2, 0.9, 0.6])
    # k_i = 0: full adoption of the leader's opinion
    p = LeaderParams(k=np.array([0.5, 0.0, 0.0]), w1=np.array([0.0, 1.0, 2.0]), T=3.0)
    np.testing.assert_allclose(leader_limit(p, x0), [0.2, 0.2, 0.2], atol=1e-15)
    # w_i1 = 0: fully detached followers keep their opinions
    p = LeaderParams(k=np.array([0.5, 0.7, 0.9]), w1=np.zeros(3), T=3.0)
    np.testing.assert_allclose(leader_limit(p, x0), x0, atol=1e-15)
    # w_i1 = k_i: midpoint
    p = LeaderParams(k=np.array([0.5, 0.7, 0.9]), w1=np.array([0.0, 0.7, 0.9]), T=3.0)
    np.testing.assert_allclose(leader_limit(p, x0)[1:], (x0[1:] + 0.2) / 2.0,
                               atol=1e-15)


def test_leader_distance():
    p = heterogeneous_leader()
    x0 = np.array([0.1, 0.1, 0.5, 0.75, 0.9])
    assert leader_distance(p, 1, x0, 1.0) == 0.0  # same initial opinion
    assert leader_distance(p, 2, x0, 0.0) == pytest.approx(0.4)
    ts = np.linspace(0, p.T, 9)
    for i in (2, 3, 4):
        vals = [leader_distance(p, i, x0, t) for t in ts]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


def test_leader_distance_matches_solver(fig2b_net):
    traj = solve_equilibrium(fig2b_net, 201)
    p = leader_params(fig2b_net)
    mid = 77
    for i in (1, 5, 9):
        measured = abs(traj.x[mid, i] - traj.x[mid, 0])
        predicted = leader_distance(p, i, fig2b_net.x0, traj.grid[mid])
        assert measured == pytest.approx(predicted, abs=1e-8)


def test_leader_consensus_time_monotone_bisection(fig2b_net):
    p = leader_params(fig2b_net)
    t = leader_consensus_time(p, 9, fig2b_net.x0, 0.1)
    # verify against a dense scan of the closed form
    ts = np.linspace(0, p.T, 20001)
    dist = np.array([leader_distance(p, 9, fig2b_net.x0, s) for s in ts])
    scan = ts[np.argmax(dist <= 0.1)]
    assert t == pytest.approx(scan, abs=1e-3)


def test_indifferent_follower_convention():
    # k_i = w_i1 = 0: the follower has no incentives and stays put
    p = LeaderParams(k=np.array([0.5, 0.0]), w1=np.array([0.0, 0.0]), T=2.0)
    x0 = np.array([0.3, 0.8])
    for t in (0.0, 1.0, 2.0):
        assert leader_trajectory(p, x0, t)[1] == x0[1]
    assert leader_limit(p, x0)[1] == x0[1]
    assert leader_distance(p, 1, x0, 1.5) == pytest.approx(0.5)
