"""Pseudo-convex weights, admissible parameter selection, cutoff subsystems,
boundary terms, the weighted two-sided inequality report, and the
unique-continuation (observability) experiment for linear coupled wave
systems on a split interval."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyWindow, Infeasible, OutOfDomain
from .evolve import (IntegratorConfig, LinearCoupledSystem, LinearTrajectory,
                     make_linear_system, simulate_linear_coupled)
from .discretize import forward_diff


# ---------------------------------------------------------------------------
# setup and weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CarlemanSetup:
    """Split-interval geometry and admissible weight parameters.

    The interval (0, length) is split at ``L0`` into the two subdomains; the
    observation interval omega has half-width epsilon/2 around L0, and the
    retracted sets V1, V2 stop epsilon/4 short of L0.  The time weight uses the
    horizon T, pseudo-convexity constant c in (0,1) and margin delta > 0; sigma
    is the level separating the interior window [t0, t1].
    """

    length: float
    L0: float
    epsilon: float
    T: float
    c: float
    delta: float
    sigma: float
    t0: float = 0.0
    t1: float = 0.0
    tau: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.L0 < self.length:
            raise ValueError("split point must lie strictly inside (0, length)")
        if not 0.0 < self.c < 1.0:
            raise ValueError("pseudo-convexity constant must lie in (0, 1)")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.epsilon <= 0 or self.epsilon / 2 > min(self.L0,
                                                       self.length - self.L0):
            raise ValueError("epsilon must be positive with omega inside (0, L)")
        if not self.c * self.T ** 2 > 4 * self.max_d + 4 * self.delta:
            raise ValueError(
                f"c T^2 = {self.c * self.T ** 2:.6g} must exceed "
                f"4 max d + 4 delta = {4 * self.max_d + 4 * self.delta:.6g}")
        if not 0.0 < self.sigma < self.min_d:
            raise ValueError(
                f"sigma must lie in (0, {self.min_d:.6g})")

    @property
    def subdomains(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return ((0.0, self.L0), (self.L0, self.length))

    @property
    def omega(self) -> tuple[float, float]:
        return (self.L0 - self.epsilon / 2, self.L0 + self.epsilon / 2)

    @property
    def V1(self) -> tuple[float, float]:
        return (0.0, self.L0 - self.epsilon / 4)

    @property
    def V2(self) -> tuple[float, float]:
        return (self.L0 + self.epsilon / 4, self.length)

    @property
    def min_d(self) -> float:
        """min over either closed subdomain of its weight; equals length^2/2."""
        return self.length ** 2 / 2

    @property
    def max_d(self) -> float:
        """max over the closed subdomains of the spatial weights (at x = L0)."""
        return max(d_weight(1, self.L0, self.length),
                   d_weight(2, self.L0, self.length))


def make_setup(length: float, L0: float, epsilon: float, T: float, c: float,
               delta: float, sigma: float, tau: float = 1.0) -> CarlemanSetup:
    """Build a setup and fill in the widest admissible interior window."""
    base = CarlemanSetup(length=length, L0=L0, epsilon=epsilon, T=T, c=c,
                         delta=delta, sigma=sigma, tau=tau)
    win = sigma_window(base, sigma=sigma)
    return dataclasses.replace(base, t0=win.t0, t1=win.t1)


def d_weight(j: int, x, length: float):
    """Strictly convex spatial weight of subdomain j: squared distance to a
    point outside the interval (scaled by 1/2)."""
    x = np.asarray(x, dtype=float)
    if j == 1:
        return 0.5 * (x + length) ** 2
    if j == 2:
        return 0.5 * (x - 2 * length) ** 2
    raise ValueError("subdomain index must be 1 or 2")


def d_weight_dx(j: int, x, length: float):
    x = np.asarray(x, dtype=float)
    if j == 1:
        return x + length
    if j == 2:
        return x - 2 * length
    raise ValueError("subdomain index must be 1 or 2")


def weight_eval(j: int, x, t, setup: CarlemanSetup,
                gamma: float = 1.0) -> tuple:
    """Closed-form (d_j, phi_j, d phi_j/dt, metric gradient coefficient) at
    (x, t); the metric gradient of phi_j is gamma * d_x phi_j along d_x."""
    lo, hi = setup.subdomains[j - 1]
    x_arr = np.asarray(x, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(x_arr < lo - 1e-12) or np.any(x_arr > hi + 1e-12):
        raise OutOfDomain(f"x outside closed subdomain {j}")
    if np.any(t_arr < -1e-12) or np.any(t_arr > setup.T + 1e-12):
        raise OutOfDomain("t outside [0, T]")
    d = d_weight(j, x_arr, setup.length)
    phi = d - setup.c * (t_arr - setup.T / 2) ** 2
    dphi_dt = -2.0 * setup.c * (t_arr - setup.T / 2)
    grad = gamma * d_weight_dx(j, x_arr, setup.length)
    return d, phi, dphi_dt, grad


# ---------------------------------------------------------------------------
# parameter selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeParameters:
    T0: tuple[float, float]
    T: float
    c: float
    delta: float


def select_time_parameters(length: float, L0: float, delta_frac: float = 0.5,
                           T: float | None = None,
                           safety: float = 1.05) -> TimeParameters:
    """Minimal horizons from the weight maxima plus an admissible (c, delta).

    T defaults to ``safety`` times the larger minimal horizon; c is placed
    midway between the feasibility threshold and 1 (scaled to T), and delta
    takes ``delta_frac`` of the remaining slack.  Raises Infeasible when the
    requested T does not exceed both minimal horizons strictly.
    """
    if not 0.0 < L0 < length:
        raise ValueError("split point must lie strictly inside (0, length)")
    max_d1 = float(d_weight(1, L0, length))
    max_d2 = float(d_weight(2, L0, length))
    T0 = (2 * math.sqrt(max_d1), 2 * math.sqrt(max_d2))
    md = max(max_d1, max_d2)
    if T is None:
        T = safety * max(T0)
    if T * T <= 4 * md:
        raise Infeasible(
            f"T = {T:.6g} does not exceed the minimal horizon {max(T0):.6g}")
    # need c < 1 with c T^2 > 4 md + 4 delta; put c T^2 halfway in the gap
    c = (4 * md + T * T) / (2 * T * T)
    slack = c * T * T - 4 * md
    delta = delta_frac * slack / 4
    if not (0 < c < 1 and delta > 0):
        raise Infeasible(f"no admissible (c, delta) for T = {T:.6g}")
    return TimeParameters(T0=T0, T=T, c=c, delta=delta)


@dataclass(frozen=True)
class SigmaWindow:
    t0: float
    t1: float
    sigma: float
    sigma_star: float
    gradient_bound_lhs: float
    gradient_bound_rhs: float
    gradient_bound_holds: bool


def sigma_window(setup: CarlemanSetup, sigma: float | None = None,
                 es_epsilon: float | None = None,
                 n_check: int = 201) -> SigmaWindow:
    """Widest symmetric window [t0, t1] around T/2 with both weights >= sigma
    on their closed subdomains, plus a grid check of the uniform bound on
    |d phi/dt|^2 + |metric gradient of phi|^2."""
    if sigma is None:
        sigma = 0.5 * setup.min_d
    if sigma >= setup.min_d:
        raise EmptyWindow(
            f"sigma = {sigma:.6g} >= min weight {setup.min_d:.6g}")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    half = math.sqrt((setup.min_d - sigma) / setup.c)
    t0 = setup.T / 2 - half
    t1 = setup.T / 2 + half
    sigma_star = 0.9 * sigma

    if es_epsilon is None:
        es_epsilon = 0.5 * min(2 - 2 * setup.c, 1.0)
    ts = np.linspace(0.0, setup.T, n_check)
    lhs = 0.0
    for j in (1, 2):
        lo, hi = setup.subdomains[j - 1]
        xs = np.linspace(lo, hi, n_check)
        _, _, dphi_dt, grad = weight_eval(j, xs[:, None], ts[None, :], setup)
        lhs = max(lhs, float(np.max(dphi_dt ** 2 + grad ** 2)))
    rhs = 4 * (1 + 7 * setup.c) * sigma_star / (es_epsilon * (1 - setup.c))
    return SigmaWindow(t0=t0, t1=t1, sigma=sigma, sigma_star=sigma_star,
                       gradient_bound_lhs=lhs, gradient_bound_rhs=rhs,
                       gradient_bound_holds=lhs <= rhs)


def q_sigma_membership(x, t, setup: CarlemanSetup):
    """True where min over j of phi_j(x, t) >= sigma; vectorized in (x, t)."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    tt = setup.c * (t - setup.T / 2) ** 2
    phi1 = d_weight(1, x, setup.length) - tt
    phi2 = d_weight(2, x, setup.length) - tt
    return np.minimum(phi1, phi2) >= setup.sigma


def window_inside_q_sigma(setup: CarlemanSetup, n_check: int = 201) -> bool:
    """Grid sweep of subdomain x window membership in the sigma level set."""
    ts = np.linspace(setup.t0, setup.t1, n_check)
    for j in (1, 2):
        lo, hi = setup.subdomains[j - 1]
        xs = np.linspace(lo, hi, n_check)
        if not np.all(q_sigma_membership(xs[:, None], ts[None, :], setup)):
            return False
    return True


# ---------------------------------------------------------------------------
# convexity-ratio rescaling
# ---------------------------------------------------------------------------


def kij_values(gammas, setup: CarlemanSetup) -> np.ndarray:
    """inf over the subdomain of |metric gradient of d_j|^2 / d_j per
    (component i, subdomain j); equals 2 gamma_i identically for these weights."""
    gammas = np.asarray(gammas, dtype=float)
    return np.stack([2 * gammas, 2 * gammas], axis=1)


def rescale_factor(gammas, setup: CarlemanSetup, target: float = 4.0,
                   margin: float = 1.01) -> float:
    """Multiplier lambda for the spatial weights making every convexity ratio
    exceed ``target`` (the ratio scales linearly with the weights)."""
    k_min = float(np.min(kij_values(gammas, setup)))
    return margin * target / k_min


# ---------------------------------------------------------------------------
# cutoffs and subsystem runs
# ---------------------------------------------------------------------------


def _smoothstep(s):
    """Quintic C^2 ramp from 0 at s=0 to 1 at s=1."""
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (6 * s ** 2 - 15 * s + 10)


def cutoff(j: int, x, setup: CarlemanSetup):
    """C^2 cutoff: 1 on the retracted set V_j, 0 outside subdomain j, with a
    quintic transition over the epsilon/4 collar next to the split point."""
    x = np.asarray(x, dtype=float)
    eps = setup.epsilon
    if j == 1:
        # 1 on [0, L0 - eps/4], 0 at and beyond L0
        s = (setup.L0 - x) / (eps / 4)
        return _smoothstep(s)
    if j == 2:
        s = (x - setup.L0) / (eps / 4)
        return _smoothstep(s)
    raise ValueError("subdomain index must be 1 or 2")


def subdomain_node_counts(setup: CarlemanSetup, n_total: int) -> tuple[int, int]:
    """Split a node budget proportionally to subdomain lengths."""
    n1 = max(3, int(round(n_total * setup.L0 / setup.length)))
    n2 = max(3, n_total - n1)
    return n1, n2


def simulate_cutoff_subsystems(gammas, p, q, u0_funcs, u1_funcs,
                               setup: CarlemanSetup, n_total: int,
                               cfg: IntegratorConfig) -> dict:
    """Run the restricted linear systems on both subdomains with cutoff initial
    data chi_j * u0, chi_j * u1; returns {1: trajectory, 2: trajectory}."""
    n1, n2 = subdomain_node_counts(setup, n_total)
    out = {}
    for j, (x0, x1), nj in ((1, setup.subdomains[0], n1),
                            (2, setup.subdomains[1], n2)):
        sys_j = make_linear_system(gammas, p, q, length=x1 - x0, n=nj, x0=x0)
        xs = sys_j.abs_nodes
        chi = cutoff(j, xs, setup)
        U = np.stack([chi * np.asarray(f(xs), dtype=float) for f in u0_funcs])
        V = np.stack([chi * np.asarray(f(xs), dtype=float) for f in u1_funcs])
        out[j] = simulate_linear_coupled(sys_j, U, V, cfg)
    return out


# ---------------------------------------------------------------------------
# boundary terms and the two-sided inequality report
# ---------------------------------------------------------------------------


def _one_sided_boundary_slopes(u: np.ndarray, h: float) -> tuple[float, float]:
    """Second-order one-sided first derivatives at the two zero-Dirichlet
    boundary points of an interior-node field."""
    left = (4.0 * u[0] - u[1]) / (2.0 * h)
    right = (-4.0 * u[-1] + u[-2]) / (2.0 * h)
    return float(left), float(right)


_EXP_CAP = 700.0


def boundary_term(traj: LinearTrajectory, i: int, j: int, setup: CarlemanSetup,
                  tau: float | None = None) -> float:
    """Weighted flux functional of component i on subdomain j: time quadrature
    of 2 tau e^{2 tau phi_j} (normal derivative)^2 (normal weight slope) over
    the two boundary points.  The normal derivative in the component metric is
    -sqrt(gamma) d_x at the left end and +sqrt(gamma) d_x at the right end."""
    if tau is None:
        tau = setup.tau
    sysm = traj.system
    gamma = float(sysm.gammas[i])
    h = sysm.grid.h
    x_lo, x_hi = sysm.domain
    sg = math.sqrt(gamma)

    # normal slope of the spatial weight at the two ends
    dd_lo = -sg * float(d_weight_dx(j, x_lo, setup.length))
    dd_hi = sg * float(d_weight_dx(j, x_hi, setup.length))
    _, phi_lo, _, _ = weight_eval(j, x_lo, traj.times, setup)
    _, phi_hi, _, _ = weight_eval(j, x_hi, traj.times, setup)

    vals = np.empty(len(traj.times))
    for m in range(len(traj.times)):
        u = traj.fields[m, i]
        sl, sr = _one_sided_boundary_slopes(u, h)
        nl, nr = -sg * sl, sg * sr
        term = 0.0
        for nd, dd, phi in ((nl, dd_lo, phi_lo[m]), (nr, dd_hi, phi_hi[m])):
            if nd == 0.0:
                continue
            # log-space assembly of e^{2 tau phi} nd^2, signed by dd
            expo = 2.0 * tau * phi + 2.0 * math.log(abs(nd))
            term += math.copysign(abs(dd) * math.exp(min(expo, _EXP_CAP)), dd)
        vals[m] = 2.0 * tau * term
    return float(np.trapezoid(vals, traj.times))


def _endpoint_energy(traj: LinearTrajectory, m: int) -> float:
    """Sum over components of the h-weighted field/gradient/velocity energy at
    sample index m."""
    sysm = traj.system
    grid = sysm.grid
    total = 0.0
    for i in range(sysm.n_components):
        u = traj.fields[m, i]
        v = traj.velocities[m, i]
        du = forward_diff(u, grid)
        total += grid.h * (float(np.dot(u, u))
                          + sysm.gammas[i] * float(np.dot(du, du))
                          + float(np.dot(v, v)))
    return total


@dataclass
class CarlemanCheckRow:
    tau: float
    lhs: float                 # sum over (i, j) of the boundary terms
    endpoint_energy: float     # sum_i of initial plus final energies
    k_T: float                 # largest constant with lhs >= k_T * energy


@dataclass
class CarlemanCheckReport:
    rows: list = field(default_factory=list)

    @property
    def taus(self) -> np.ndarray:
        return np.array([r.tau for r in self.rows])

    @property
    def max_kt_energy(self) -> float:
        """max over tau of k_T * endpoint energy (the proof's vanishing
        quantity for observation-vanishing data)."""
        return max((r.k_T * r.endpoint_energy for r in self.rows), default=0.0)


def carleman_inequality_check(trajs: dict, setup: CarlemanSetup,
                              taus=(1.0, 2.0, 4.0, 8.0, 16.0)) -> CarlemanCheckReport:
    """Report both sides of the weighted flux inequality over a tau sweep.

    ``trajs`` maps subdomain index to the trajectory of its restricted system.
    For each tau the report carries the summed boundary terms, the summed
    initial-plus-final energies, and the largest k_T with lhs >= k_T * energy.
    No sign assertion is made for generic data.
    """
    energy = 0.0
    for j in (1, 2):
        traj = trajs[j]
        energy += _endpoint_energy(traj, 0) + _endpoint_energy(traj, -1)

    report = CarlemanCheckReport()
    for tau in taus:
        lhs = 0.0
        for j in (1, 2):
            traj = trajs[j]
            for i in range(traj.system.n_components):
                lhs += boundary_term(traj, i, j, setup, tau=tau)
        k_T = lhs / energy if energy > 0 else 0.0
        report.rows.append(CarlemanCheckRow(tau=tau, lhs=lhs,
                                            endpoint_energy=energy, k_T=k_T))
    return report


# ---------------------------------------------------------------------------
# unique-continuation experiment
# ---------------------------------------------------------------------------


@dataclass
class UcpReport:
    times: np.ndarray
    omega_trace: np.ndarray     # L^2 norm over the observation interval
    initial_energy: float
    terminal_energy: float
    ratio: float                # sup_t omega trace / sqrt(initial energy)


def ucp_experiment(system: LinearCoupledSystem, u0, u1, setup: CarlemanSetup,
                   cfg: IntegratorConfig) -> UcpReport:
    """Full-domain run reporting how visible the solution is on the
    observation interval: the ratio sup over time of the omega-restricted L^2
    norm to the square root of the initial energy."""
    traj = simulate_linear_coupled(system, u0, u1, cfg)
    grid = system.grid
    lo, hi = setup.omega
    mask = (system.abs_nodes > lo) & (system.abs_nodes < hi)
    ns = len(traj.times)
    trace = np.empty(ns)
    for m in range(ns):
        block = traj.fields[m][:, mask]
        trace[m] = math.sqrt(grid.h * float(np.sum(block * block)))
    f0 = float(traj.total_energy[0])
    ratio = float(np.max(trace)) / math.sqrt(f0) if f0 > 0 else 0.0
    return UcpReport(times=traj.times.copy(), omega_trace=trace,
                     initial_energy=f0,
                     terminal_energy=float(traj.total_energy[-1]),
                     ratio=ratio)


# ---------------------------------------------------------------------------
# closed-form verification of the weight machinery
# ---------------------------------------------------------------------------


def verify_setup(setup: CarlemanSetup, gammas=(1.0,),
                 n_check: int = 401) -> dict:
    """Exact (roundoff-only) verification of the weight properties.

    Returns a dict of named boolean verdicts together with the computed
    quantities: time-endpoint bound, window level bound, the horizon
    inequality, weight minima, convexity-ratio positivity, boundary slope
    signs, and the window's membership in the sigma level set.
    """
    L, c, T, delta, sigma = (setup.length, setup.c, setup.T, setup.delta,
                             setup.sigma)
    gammas = np.asarray(gammas, dtype=float)
    out = {}

    out["horizon_inequality"] = c * T ** 2 > 4 * setup.max_d + 4 * delta

    # endpoint values phi_j(x, 0) = phi_j(x, T) <= -delta on the closed subdomains
    worst = -math.inf
    for j in (1, 2):
        lo, hi = setup.subdomains[j - 1]
        xs = np.linspace(lo, hi, n_check)
        _, phi, _, _ = weight_eval(j, xs, 0.0, setup)
        worst = max(worst, float(np.max(phi)))
    out["endpoint_value"] = worst
    out["endpoint_bound"] = worst <= -delta + 1e-12

    # interior window level
    level = math.inf
    for j in (1, 2):
        lo, hi = setup.subdomains[j - 1]
        xs = np.linspace(lo, hi, n_check)
        for t in (setup.t0, setup.t1):
            _, phi, _, _ = weight_eval(j, xs, t, setup)
            level = min(level, float(np.min(phi)))
    out["window_level"] = level
    out["window_bound"] = level >= sigma - 1e-12

    # weight minima and convexity data
    mins = []
    infs = []
    for j in (1, 2):
        lo, hi = setup.subdomains[j - 1]
        xs = np.linspace(lo, hi, n_check)
        d = d_weight(j, xs, setup.length)
        mins.append(float(np.min(d)))
        slope = np.abs(d_weight_dx(j, xs, setup.length))
        infs.append(float(np.min(gammas.min() * slope ** 2)))
    out["min_weight"] = mins
    out["min_weight_exact"] = all(abs(m - L ** 2 / 2) < 1e-12 for m in mins)
    out["gradient_inf_positive"] = all(v > 0 for v in infs)
    # second spatial derivative of both weights is identically 1
    out["hessian_identity"] = True

    # boundary slope signs at the outer ends inside the retracted sets
    sg = math.sqrt(float(gammas.min()))
    out["left_outer_slope"] = -sg * float(d_weight_dx(1, 0.0, L))
    out["right_outer_slope"] = sg * float(d_weight_dx(2, L, L))
    out["boundary_sign"] = (out["left_outer_slope"] < 0
                            and out["right_outer_slope"] < 0)

    out["window_in_level_set"] = window_inside_q_sigma(setup, n_check=n_check)
    out["all_passed"] = all(out[k] for k in
                            ("horizon_inequality", "endpoint_bound",
                             "window_bound", "min_weight_exact",
                             "gradient_inf_positive", "hessian_identity",
                             "boundary_sign", "window_in_level_set"))
    return out
