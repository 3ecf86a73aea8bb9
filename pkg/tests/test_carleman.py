import math

import numpy as np
import pytest

import bresse_lab as bl
from bresse_lab import carleman as ca
from bresse_lab.errors import EmptyWindow, Infeasible, OutOfDomain


@pytest.fixture
def setup():
    return bl.make_setup(length=1.0, L0=0.5, epsilon=0.2, T=4.0, c=0.5,
                         delta=0.5, sigma=0.25)


def test_setup_regions(setup):
    assert setup.subdomains == ((0.0, 0.5), (0.5, 1.0))
    assert setup.omega == (0.4, 0.6)
    assert setup.V1 == (0.0, 0.45)
    assert setup.V2 == (0.55, 1.0)
    assert setup.min_d == 0.5
    assert setup.max_d == 1.125


def test_setup_rejects_bad_parameters():
    with pytest.raises(ValueError):
        bl.make_setup(1.0, 0.5, 0.2, T=2.0, c=0.5, delta=0.5, sigma=0.25)
    with pytest.raises(ValueError):
        bl.make_setup(1.0, 0.5, 0.2, T=4.0, c=1.5, delta=0.5, sigma=0.25)
    with pytest.raises(ValueError):
        bl.make_setup(1.0, 0.5, 0.2, T=4.0, c=0.5, delta=0.5, sigma=0.6)


def test_weight_closed_form_values(setup):
    d, phi, dphi, grad = bl.weight_eval(1, 0.0, setup.T / 2, setup)
    assert d == 0.5 and phi == 0.5 and dphi == 0.0 and grad == 1.0
    d, _, _, _ = bl.weight_eval(1, 0.5, 0.0, setup)
    assert d == 1.125
    d, _, _, _ = bl.weight_eval(2, 1.0, 0.0, setup)
    assert d == 0.5
    # vertex of the time parabola: phi equals the spatial weight
    xs = np.linspace(0.0, 0.5, 7)
    d, phi, _, _ = bl.weight_eval(1, xs, setup.T / 2, setup)
    assert np.allclose(phi, d)


def test_weight_eval_out_of_domain(setup):
    with pytest.raises(OutOfDomain):
        bl.weight_eval(1, 0.7, 1.0, setup)
    with pytest.raises(OutOfDomain):
        bl.weight_eval(1, 0.2, 5.0, setup)


def test_select_time_parameters():
    tp = bl.select_time_parameters(1.0, 0.5)
    assert tp.T0[0] == pytest.approx(math.sqrt(4.5))
    assert tp.T0[1] == pytest.approx(math.sqrt(4.5))
    assert tp.T > max(tp.T0)
    assert 0 < tp.c < 1 and tp.delta > 0
    assert tp.c * tp.T ** 2 > 4 * 1.125 + 4 * tp.delta


def test_select_time_parameters_explicit_T():
    tp = bl.select_time_parameters(1.0, 0.5, T=4.0)
    assert tp.c * 16 > 4.5 + 4 * tp.delta


def test_select_time_parameters_infeasible_at_minimum():
    with pytest.raises(Infeasible):
        bl.select_time_parameters(1.0, 0.5, T=math.sqrt(4.5))


def test_sigma_window_closed_form(setup):
    win = bl.sigma_window(setup, sigma=0.25)
    assert win.t0 == pytest.approx(2 - math.sqrt(0.5))
    assert win.t1 == pytest.approx(2 + math.sqrt(0.5))
    assert win.sigma_star == pytest.approx(0.225)
    assert win.gradient_bound_holds


def test_sigma_window_empty_at_level(setup):
    with pytest.raises(EmptyWindow):
        bl.sigma_window(setup, sigma=0.5)


def test_q_sigma_membership(setup):
    # endpoints of time never belong: phi <= -delta there
    assert not bl.q_sigma_membership(0.25, 0.0, setup)
    # the vertex belongs wherever the spatial weight clears the level
    assert bl.q_sigma_membership(0.25, setup.T / 2, setup)
    assert bl.window_inside_q_sigma(setup)


def test_kij_and_rescale(setup):
    k = bl.kij_values((1.0, 1.0, 1.0), setup)
    assert np.allclose(k, 2.0)
    lam = bl.rescale_factor((1.0, 1.0, 1.0), setup)
    assert np.all(lam * k > 4.0)


def test_verify_setup_all_passed(setup):
    checks = bl.verify_setup(setup, gammas=(1.0, 1.0, 1.0))
    assert checks["all_passed"]
    assert checks["endpoint_value"] == pytest.approx(-0.875)
    assert checks["left_outer_slope"] == pytest.approx(-1.0)
    assert checks["right_outer_slope"] == pytest.approx(-1.0)


def test_cutoff_partition(setup):
    x = np.linspace(0.0, 1.0, 401)
    c1 = bl.cutoff(1, x, setup)
    c2 = bl.cutoff(2, x, setup)
    assert np.allclose(c1[x <= 0.45], 1.0, atol=1e-12)
    assert np.all(c1[x >= 0.5] == 0.0)
    assert np.all(c2[x <= 0.5] == 0.0)
    assert np.allclose(c2[x >= 0.55], 1.0, atol=1e-12)
    # cutoff pieces recombine exactly away from the observation interval
    lo, hi = setup.omega
    outside = (x <= lo) | (x >= hi)
    assert np.allclose((c1 + c2)[outside], 1.0)


def _omega_vanishing_traj(j, setup, n=60, n_times=81):
    """Fabricated standing-wave trajectory supported away from the observation
    interval: satisfies the vanishing hypothesis by construction."""
    x0, x1 = setup.subdomains[j - 1]
    sysm = bl.make_linear_system([1.0], [[0.0]], [[0.0]], x1 - x0, n, x0=x0)
    x = sysm.abs_nodes
    if j == 1:
        support = np.where(x < 0.35, np.sin(np.pi * x / 0.35), 0.0)
        support[x >= 0.35] = 0.0
    else:
        support = np.where(x > 0.65, np.sin(np.pi * (x - 0.65) / 0.35), 0.0)
        support[x <= 0.65] = 0.0
    times = np.linspace(0.0, setup.T, n_times)
    fields = np.array([[np.cos(2 * np.pi * t) * support] for t in times])
    vels = np.array([[-2 * np.pi * np.sin(2 * np.pi * t) * support]
                     for t in times])
    comp = np.array([[float(np.sum(f ** 2))] for f in fields[:, 0]])
    return bl.LinearTrajectory(times=times, fields=fields, velocities=vels,
                               total_energy=comp.sum(axis=1),
                               component_energy=comp, system=sysm)


def test_boundary_term_zero_solution(setup):
    sysm = bl.make_linear_system([1.0], [[0.0]], [[0.0]], 0.5, 30)
    times = np.linspace(0.0, setup.T, 11)
    zeros = np.zeros((11, 1, 30))
    traj = bl.LinearTrajectory(times=times, fields=zeros,
                               velocities=zeros.copy(),
                               total_energy=np.zeros(11),
                               component_energy=np.zeros((11, 1)), system=sysm)
    assert bl.boundary_term(traj, 0, 1, setup) == 0.0


def test_boundary_term_sign_for_omega_vanishing(setup):
    """Vanishing near the split point kills the only positive interface
    contribution; the outer endpoints carry negative weight slopes."""
    for tau in (1.0, 2.0, 4.0, 8.0, 16.0):
        total = 0.0
        for j in (1, 2):
            traj = _omega_vanishing_traj(j, setup)
            total += bl.boundary_term(traj, 0, j, setup, tau=tau)
        assert total <= 1e-10


def test_boundary_term_strictly_negative_standing_wave(setup):
    traj = _omega_vanishing_traj(1, setup)
    assert bl.boundary_term(traj, 0, 1, setup, tau=2.0) < 0


def test_carleman_inequality_check_report(setup):
    trajs = {j: _omega_vanishing_traj(j, setup) for j in (1, 2)}
    report = bl.carleman_inequality_check(trajs, setup)
    assert len(report.rows) == 5
    for row in report.rows:
        assert row.endpoint_energy > 0
        assert row.lhs <= 1e-10
        assert row.k_T <= 1e-10
    assert report.max_kt_energy <= 1e-8


def test_cutoff_subsystems_initial_data(setup):
    gammas, p, q = bl.bresse_linearized_couplings(bl.BeamParameters())
    u0 = [lambda x: np.sin(np.pi * x)] * 3
    u1 = [lambda x: np.zeros_like(x)] * 3
    cfg = bl.IntegratorConfig(dt=0.05, t_end=setup.T, stride=10)
    trajs = bl.simulate_cutoff_subsystems(gammas, p, q, u0, u1, setup, 60, cfg)
    for j in (1, 2):
        traj = trajs[j]
        x = traj.system.abs_nodes
        chi = bl.cutoff(j, x, setup)
        assert np.allclose(traj.fields[0, 0], chi * np.sin(np.pi * x))
        assert np.allclose(traj.velocities[0], 0.0)


def test_ucp_experiment_zero_and_explicit(setup):
    sysm = bl.make_linear_system([1.0], [[0.0]], [[0.0]], 1.0, 80)
    cfg = bl.IntegratorConfig(dt=0.01, t_end=setup.T, stride=5)
    zeros = np.zeros((1, 80))
    rep = bl.ucp_experiment(sysm, zeros, zeros.copy(), setup, cfg)
    assert rep.ratio == 0.0 and rep.initial_energy == 0.0

    u0 = [lambda x: np.sin(np.pi * x)]
    u1 = [lambda x: np.zeros_like(x)]
    rep = bl.ucp_experiment(sysm, u0, u1, setup, cfg)
    # sin(pi x) restricted to (0.4, 0.6) keeps a sizable share of the norm
    assert rep.ratio > 0.15
    assert rep.initial_energy > 0
