import numpy as np
import pytest

import bresse_lab as bl
from bresse_lab.errors import AssumptionViolated
from bresse_lab.stationary import gradient_norm_squared


def test_zero_source_only_trivial_solution(params, grid):
    sols = bl.enumerate_stationary(params, bl.make_source("zero"), grid)
    assert len(sols) == 1
    assert sols[0].residual_norm < 1e-10
    assert np.max(np.abs(sols[0].displacements)) == 0.0


def test_constant_forcing_unique_solution(params, grid):
    src = bl.make_source("constant", c1=0.5, c2=0.0, c3=-0.3, alpha=0.05)
    sols = bl.enumerate_stationary(params, src, grid)
    assert len(sols) == 1
    s = sols[0]
    # verify the force balance directly
    ops = bl.build_operators(params, grid)
    grad = src.gradient(s.phi, s.psi, s.w).ravel()
    res = ops.stiffness @ s.displacements + grid.h * grad
    assert np.max(np.abs(res)) < 1e-10
    assert np.max(np.abs(s.displacements)) > 0


def test_double_well_multiple_solutions(params, grid):
    src = bl.make_source("double_well", kappa=5.0, a=1.0)
    sols = bl.enumerate_stationary(params, src, grid, guess_scale=1.5)
    assert len(sols) >= 3  # zero plus a symmetric pair
    maxima = sorted(float(np.max(np.abs(s.phi))) for s in sols)
    assert maxima[0] == 0.0 and maxima[-1] > 0.1


def test_solutions_respect_gradient_bound(params, grid):
    src = bl.make_source("double_well", kappa=5.0, a=1.0)
    bound = bl.stationary_bound(params, src, grid)
    for s in bl.enumerate_stationary(params, src, grid, guess_scale=1.5):
        assert gradient_norm_squared(s, grid) <= bound * (1 + 1e-9)


def test_stationary_bound_formula(params, grid):
    src = bl.make_source("constant", c1=1.0, alpha=0.1)
    beta = bl.beta_constant_discrete(params, grid)
    expected = (2 * beta * src.c_F * 1.0
                / (1 - 2 * 0.1 * beta / np.pi ** 2))
    assert bl.stationary_bound(params, src, grid) == pytest.approx(expected)


def test_stationary_bound_rejects_large_alpha(params, grid):
    beta = bl.beta_constant_discrete(params, grid)
    alpha_bad = np.pi ** 2 / (2 * beta) * 1.01
    src = bl.make_source("constant", c1=1.0, alpha=alpha_bad)
    with pytest.raises(AssumptionViolated):
        bl.stationary_bound(params, src, grid)


def test_solve_stationary_converges_quadratically(params, grid):
    src = bl.make_source("double_well", kappa=5.0, a=1.0)
    x = grid.nodes
    guess = np.concatenate([1.2 * np.sin(np.pi * x)] * 3)
    sol = bl.solve_stationary(params, src, grid, initial_guess=guess)
    hist = sol.residual_history
    assert sol.residual_norm < 1e-12
    assert len(hist) < 20


def test_stationary_state_is_fixed_point_of_dynamics(params, grid):
    src = bl.make_source("double_well", kappa=5.0, a=1.0)
    sols = bl.enumerate_stationary(params, src, grid, guess_scale=1.5)
    s = max(sols, key=lambda s: float(np.max(np.abs(s.phi))))
    cfg = bl.IntegratorConfig(dt=0.01, t_end=1.0, stride=10)
    traj = bl.simulate(s.as_state(), params, bl.uniform_damping(1.0), src,
                       cfg, grid)
    drift = bl.h_distance(traj.state(-1), s.as_state(), params, grid)
    assert drift < 1e-8
