"""Tests for cost evaluation, best responses, Nash residuals, stationarity
and deviation probes."""

import numpy as np
import pytest

from conftest import random_net
from opiniongame.cli import constant_candidate
from opiniongame.network import InfluenceNetwork
from opiniongame.solver import solve_equilibrium
from opiniongame.verify import (best_response, deviation_test, evaluate_cost,
                                nash_residual, quadratic_cost,
                                simpson_weights, stationarity_check)


def test_simpson_weights_basic():
    w = simpson_weights(5, 0.5)
    np.testing.assert_allclose(w, np.array([1, 4, 2, 4, 1]) * 0.5 / 3.0)
    with pytest.raises(ValueError):
        simpson_weights(4, 0.5)


def test_zero_coupling_equilibrium_cost_is_zero():
    net = InfluenceNetwork(n=3, edges={}, k=[0.0] * 3, x0=[0.2, 0.5, 0.8], T=2.0)
    traj = solve_equilibrium(net, 101)
    for i in range(3):
        assert evaluate_cost(net, traj, i).total == 0.0


def test_consensus_start_equilibrium_cost_is_zero(fig1b_net):
    net = InfluenceNetwork(n=10, edges=fig1b_net.edges, k=fig1b_net.k,
                           x0=np.full(10, 0.4), T=5.0)
    traj = solve_equilibrium(net, 101)
    for i in range(10):
        assert evaluate_cost(net, traj, i).total <= 1e-20


def test_cost_identity_on_solver_output(fig1b_net, fig2b_net):
    rng = np.random.default_rng(44)
    nets = [fig1b_net, fig2b_net, random_net(rng, n=7, T=2.0)]
    for net in nets:
        traj = solve_equilibrium(net, 201)
        for i in range(net.n):
            bd = evaluate_cost(net, traj, i)
            assert bd.total == pytest.approx(quadratic_cost(net, traj, i),
                                             abs=1e-9)
            assert bd.influence_term >= 0 and bd.stubbornness_term >= 0
            assert bd.control_term >= 0


def test_leader_cost_is_zero(fig2b_net):
    # the leader has no in-edges and never moves, so every term drops out
    traj = solve_equilibrium(fig2b_net, 201)
    assert evaluate_cost(fig2b_net, traj, 0).total <= 1e-18
    assert quadratic_cost(fig2b_net, traj, 0) <= 1e-18


def test_cost_requires_odd_samples(fig1b_net):
    traj = solve_equilibrium(fig1b_net, 100)
    with pytest.raises(ValueError):
        evaluate_cost(fig1b_net, traj, 0)


def test_best_response_free_agent_stays_put():
    # agent 0 has no in-edges and no stubbornness: doing nothing is optimal
    net = InfluenceNetwork(n=2, edges={(1, 0): 1.5}, k=[0.0, 0.3],
                           x0=[0.2, 0.9], T=2.0)
    traj = solve_equilibrium(net, 101)
    res = best_response(net, traj, 0)
    assert np.max(np.abs(res.control)) <= 1e-12
    assert res.cost <= 1e-15


def test_best_response_single_stubborn_agent():
    net = InfluenceNetwork(n=1, edges={}, k=[0.7], x0=[0.4], T=2.0)
    traj = solve_equilibrium(net, 101)
    res = best_response(net, traj, 0)
    assert np.max(np.abs(res.control)) <= 1e-12
    np.testing.assert_allclose(res.trajectory, 0.4, atol=1e-12)


def test_best_response_tracks_equilibrium(fig1b_net):
    traj = solve_equilibrium(fig1b_net, 501)
    for i in (0, 4, 9):
        res = best_response(fig1b_net, traj, i)
        assert res.gap >= -1e-9
        assert res.gap <= 1e-6
        assert np.max(np.abs(res.trajectory - traj.x[:, i])) <= 1e-3
        assert res.trajectory[0] == fig1b_net.x0[i]


def test_best_response_gap_never_meaningfully_negative():
    rng = np.random.default_rng(77)
    for _ in range(4):
        net = random_net(rng, n=6, T=2.0)
        traj = solve_equilibrium(net, 201)
        for i in range(net.n):
            assert best_response(net, traj, i).gap >= -1e-9


def test_best_response_gradient_vanishes_quadratically(fig1b_net):
    # discrete stationarity at the sampled equilibrium: the gradient norm,
    # per unit quadrature weight, must decay at least as fast as h^2
    def scaled_gradient(m):
        traj = solve_equilibrium(fig1b_net, m)
        from opiniongame.verify import _Transcription
        model = _Transcription(fig1b_net, traj, 0)
        h = traj.grid[1] - traj.grid[0]
        return np.max(np.abs(model.gradient(traj.u[:, 0]))) / h

    g1, g2 = scaled_gradient(101), scaled_gradient(201)
    assert g1 / g2 >= 3.0


def test_nash_residual_small_on_solver_output(fig1b_net):
    traj = solve_equilibrium(fig1b_net, 501)
    assert nash_residual(fig1b_net, traj) <= 1e-6


def test_nash_residual_converges_at_least_quadratically(fig1b_net):
    # measured decay is quartic (see decisions notes); O(h^2) is the bound
    res = [nash_residual(fig1b_net, solve_equilibrium(fig1b_net, m))
           for m in (101, 201, 401)]
    assert res[0] / res[1] >= 3.0
    assert res[1] / res[2] >= 3.0


def test_nash_residual_positive_for_constant_candidate(fig1b_net):
    cand = constant_candidate(fig1b_net, 201)
    assert nash_residual(fig1b_net, cand) > 1e-2


def test_nash_residual_zero_for_decoupled_constant_candidate():
    net = InfluenceNetwork(n=3, edges={}, k=[0.0] * 3, x0=[0.2, 0.5, 0.8], T=2.0)
    cand = constant_candidate(net, 101)
    assert nash_residual(net, cand) <= 1e-15


def test_nash_residual_checks_grid(fig1b_net):
    traj = solve_equilibrium(fig1b_net, 201)
    with pytest.raises(ValueError):
        nash_residual(fig1b_net, traj, m=501)


def test_stationarity_clean_on_solver_output(fig2b_net):
    traj = solve_equilibrium(fig2b_net, 301)
    reports = stationarity_check(fig2b_net, traj)
    assert all(r.passed for r in reports)
    assert all(r.control_residual <= 1e-12 for r in reports)
    assert all(r.initial_residual == 0.0 for r in reports)
    assert all(r.transversality_residual <= 1e-8 for r in reports)


def test_stationarity_flags_zeroed_costate(fig1b_net):
    from opiniongame.solver import EquilibriumTrajectory
    traj = solve_equilibrium(fig1b_net, 201)
    broken = EquilibriumTrajectory(grid=traj.grid, x=traj.x,
                                   p=np.zeros_like(traj.p),
                                   u=np.zeros_like(traj.u))
    reports = stationarity_check(fig1b_net, broken)
    assert any(r.costate_residual > r.costate_tol for r in reports)


def test_stationarity_trivial_for_single_agent():
    net = InfluenceNetwork(n=1, edges={}, k=[0.5], x0=[0.3], T=2.0)
    traj = solve_equilibrium(net, 101)
    rep = stationarity_check(net, traj)[0]
    assert rep.passed
    assert rep.costate_residual <= 1e-12


def test_deviation_probes_pass_on_equilibrium(fig1b_net):
    traj = solve_equilibrium(fig1b_net, 501)
    ok, worst = deviation_test(fig1b_net, traj, 3, count=50, seed=0)
    assert ok and worst <= 1e-9


def test_deviation_zero_amplitude_gap_is_exactly_zero(fig1b_net):
    traj = solve_equilibrium(fig1b_net, 201)
    ok, worst = deviation_test(fig1b_net, traj, 0, count=5, seed=1,
                               amplitudes=(0.0,))
    assert ok and worst == 0.0


def test_deviation_finds_profit_on_perturbed_candidate(fig1b_net):
    cand = constant_candidate(fig1b_net, 201)
    ok, worst = deviation_test(fig1b_net, cand, 0, count=50, seed=0)
    assert not ok and worst > 1e-3


def test_deviation_seeded_reproducible(fig1b_net):
    traj = solve_equilibrium(fig1b_net, 201)
    a = deviation_test(fig1b_net, traj, 2, count=20, seed=7)
    b = deviation_test(fig1b_net, traj, 2, count=20, seed=7)
    assert a == b
