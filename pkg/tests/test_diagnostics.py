import numpy as np
import pytest

import bresse_lab as bl
from bresse_lab.errors import (EmptyStationarySet, GridMismatch,
                               NonpositiveEnergy)
from conftest import random_state, sine_state


def damped_traj(params, grid, t_end=3.0, src=None, z0=None):
    src = src or bl.make_source("zero")
    cfg = bl.IntegratorConfig(dt=bl.default_dt(grid), t_end=t_end, stride=5)
    return bl.simulate(z0 or sine_state(grid), params,
                       bl.uniform_damping(1.0), src, cfg, grid), src


def test_energy_report_identity_and_monotone(params, grid):
    traj, src = damped_traj(params, grid)
    rep = bl.energy_report(traj, params, src)
    assert rep.identity_residual < 1e-10
    assert rep.total_nonincreasing
    assert rep.final_total < rep.initial_total
    assert rep.lower_bound_holds


def test_energy_report_with_source(params, grid):
    src = bl.make_source("power", coef=0.5, p=1.0)
    traj, _ = damped_traj(params, grid, src=src)
    rep = bl.energy_report(traj, params, src)
    assert rep.identity_residual < 1e-10
    assert np.all(rep.potential >= 0)
    assert np.allclose(rep.total, rep.state_norm_sq + rep.potential)


def test_fit_decay_rate_recovers_exact_exponential():
    t = np.linspace(0, 10, 200)
    e = 3.0 * np.exp(-0.7 * t)
    fit = bl.fit_decay_rate(t, e)
    assert fit.omega == pytest.approx(0.7, rel=1e-10)
    assert fit.amplitude == pytest.approx(3.0, rel=1e-8)
    assert fit.residual < 1e-12
    assert fit.t_start >= 2.5  # first quarter excluded


def test_fit_decay_rate_rejects_nonpositive():
    t = np.linspace(0, 1, 10)
    e = np.linspace(1.0, -0.1, 10)
    with pytest.raises(NonpositiveEnergy):
        bl.fit_decay_rate(t, e)


def test_decay_rate_oracle_uniform_unit_damping(params):
    """With unit densities and uniform unit linear damping every mode has real
    part -1/2, so the energy decays at rate one exactly."""
    g = bl.build_grid(1.0, 20)
    assert bl.decay_rate_oracle(params, bl.uniform_damping(1.0), g) \
        == pytest.approx(1.0, abs=1e-9)


def test_decay_rate_oracle_scales_with_weak_damping(params):
    """For weak uniform damping a0 the abscissa is a0/2 to leading order."""
    g = bl.build_grid(1.0, 12)
    a0 = 0.01
    rate = bl.decay_rate_oracle(params, bl.uniform_damping(1.0, a0=a0), g)
    assert rate == pytest.approx(a0, rel=1e-3)


def test_decay_rate_oracle_positive_for_localized(params):
    g = bl.build_grid(1.0, 20)
    dmp = bl.localized_damping([(0.4, 0.5)] * 3)
    rate = bl.decay_rate_oracle(params, dmp, g)
    assert 0 < rate < 1.0


def test_distance_to_stationary(params, grid):
    zero = bl.StateZ.zero(grid)
    sols = bl.enumerate_stationary(params, bl.make_source("zero"), grid)
    assert bl.distance_to_stationary(zero, sols, params, grid) == 0.0
    z = sine_state(grid)
    d = bl.distance_to_stationary(z, sols, params, grid)
    assert d == pytest.approx(np.sqrt(bl.h_norm_squared(z, params, grid)))
    with pytest.raises(EmptyStationarySet):
        bl.distance_to_stationary(z, [], params, grid)


def test_quasi_stability_terms_zero_for_identical(params, grid):
    traj, src = damped_traj(params, grid, t_end=1.0)
    terms = bl.quasi_stability_terms(traj, traj, params, src)
    assert np.all(terms.diff_norm_sq == 0)
    assert np.all(terms.sup_lower_order == 0)


def test_quasi_stability_terms_grid_mismatch(params, grid):
    traj, src = damped_traj(params, grid, t_end=1.0)
    other_grid = bl.build_grid(1.0, grid.n + 5)
    traj2, _ = damped_traj(params, other_grid, t_end=1.0)
    with pytest.raises(GridMismatch):
        bl.quasi_stability_terms(traj, traj2, params, src)


def test_quasi_stability_fit_covers_samples(params, grid):
    src = bl.make_source("power", coef=0.3, p=1.0)
    rng = np.random.default_rng(8)
    pairs = []
    for _ in range(3):
        t1, _ = damped_traj(params, grid, t_end=2.0, src=src,
                            z0=random_state(grid, rng))
        t2, _ = damped_traj(params, grid, t_end=2.0, src=src,
                            z0=random_state(grid, rng))
        pairs.append(bl.quasi_stability_terms(t1, t2, params, src))
    c1, omega, c2 = bl.fit_quasi_stability(pairs)
    assert c1 >= 1.0 and omega > 0 and c2 >= 0
    for terms in pairs:
        assert np.all(bl.check_quasi_stability(terms, omega, c1, c2))


def test_generator_matrix_spectrum_undamped(params):
    g = bl.build_grid(1.0, 10)
    A = bl.generator_matrix(params, bl.no_damping(1.0), g)
    eigs = np.linalg.eigvals(A)
    assert np.max(np.abs(eigs.real)) < 1e-10  # skew dynamics: imaginary axis
