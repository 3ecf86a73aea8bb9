"""Energy accounting, decay-rate fitting, distance to equilibria, the
quasi-stability comparison of trajectory pairs, and a spectral oracle for the
uniform decay rate of the linearly damped system."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .discretize import (DiscreteOperatorSet, Grid, StateZ, build_operators,
                         beta_constant_discrete, discrete_F_energy,
                         h_distance, h_norm_squared)
from .errors import EmptyStationarySet, GridMismatch, NonpositiveEnergy
from .evolve import Trajectory
from .model import BeamParameters, DampingSpec, SourceSpec, poincare_constant


@dataclass
class EnergyReport:
    """Time series of the energy ledger of one trajectory.

    ``total`` is the Lyapunov functional: squared state norm plus twice the
    integrated potential.  ``identity_residual`` is the worst defect of
    total(t) + dissipated(t) - total(0) over the recorded samples.
    """

    times: np.ndarray
    state_norm_sq: np.ndarray       # squared state norm E_Z(t)
    potential: np.ndarray           # 2 * integral of F
    total: np.ndarray               # E_Z + potential
    cum_dissipation: np.ndarray
    identity_residual: float
    total_nonincreasing: bool
    lower_coeff: float              # c_E in total >= c_E * E_Z - lower_offset
    lower_offset: float
    lower_bound_holds: bool

    @property
    def initial_total(self) -> float:
        return float(self.total[0])

    @property
    def final_total(self) -> float:
        return float(self.total[-1])


def energy_report(traj: Trajectory, params: BeamParameters, sources: SourceSpec,
                  mono_tol: float = 1e-10,
                  ops: DiscreteOperatorSet | None = None) -> EnergyReport:
    """Evaluate the energy ledger on the recorded samples of one run."""
    if ops is None:
        ops = build_operators(params, traj.grid)
    ns = traj.n_samples
    ez = np.empty(ns)
    pot = np.empty(ns)
    for i in range(ns):
        z = traj.state(i)
        ez[i] = h_norm_squared(z, params, traj.grid, ops)
        pot[i] = 2.0 * discrete_F_energy(z.phi, z.psi, z.w, sources, traj.grid)
    total = ez + pot
    defect = total + traj.cum_dissipation - total[0]
    residual = float(np.max(np.abs(defect)))
    scale = mono_tol * max(1.0, float(np.max(np.abs(total))))
    nonincreasing = bool(np.all(np.diff(total) <= scale))

    # theoretical coercivity of the Lyapunov functional:
    # total >= (1 - 2 alpha beta (L/pi)^2) E_Z - 2 c_F L
    beta = beta_constant_discrete(params, traj.grid)
    cp = poincare_constant(params.length)
    c_E = 1.0 - 2.0 * sources.alpha * beta * cp ** 2
    offset = 2.0 * sources.c_F * params.length
    holds = bool(np.all(total >= c_E * ez - offset
                        - 1e-10 * (1.0 + np.abs(total))))
    return EnergyReport(times=traj.times.copy(), state_norm_sq=ez,
                        potential=pot, total=total,
                        cum_dissipation=traj.cum_dissipation.copy(),
                        identity_residual=residual,
                        total_nonincreasing=nonincreasing,
                        lower_coeff=c_E, lower_offset=offset,
                        lower_bound_holds=holds)


@dataclass
class DecayFit:
    """Least-squares fit of E(t) ~ amplitude * exp(-omega t) on a window."""

    omega: float
    amplitude: float
    residual: float        # rms of the log-space fit residual
    t_start: float
    t_end: float
    n_points: int


def fit_decay_rate(times: np.ndarray, energies: np.ndarray,
                   skip_fraction: float = 0.25) -> DecayFit:
    """Log-linear least squares on the samples past the initial transient.

    The first ``skip_fraction`` of the time horizon is excluded so the fit sees
    the asymptotic regime rather than the transient redistribution of energy.
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if len(times) != len(energies):
        raise GridMismatch("times and energies have different lengths")
    t_cut = times[0] + skip_fraction * (times[-1] - times[0])
    sel = times >= t_cut
    t, e = times[sel], energies[sel]
    if len(t) < 3:
        raise ValueError("need at least 3 samples past the transient window")
    if np.any(e <= 0):
        raise NonpositiveEnergy(
            f"nonpositive energy sample in fit window (min {e.min():.3g})")
    slope, intercept = np.polyfit(t, np.log(e), 1)
    res = np.log(e) - (slope * t + intercept)
    return DecayFit(omega=float(-slope), amplitude=float(np.exp(intercept)),
                    residual=float(np.sqrt(np.mean(res ** 2))),
                    t_start=float(t[0]), t_end=float(t[-1]), n_points=len(t))


def distance_to_stationary(z: StateZ, stationary_states: list,
                           params: BeamParameters, grid: Grid) -> float:
    """State-norm distance from z to the nearest of the given equilibria."""
    if not stationary_states:
        raise EmptyStationarySet("no stationary states supplied")
    best = math.inf
    for s in stationary_states:
        target = s.as_state() if hasattr(s, "as_state") else s
        best = min(best, h_distance(z, target, params, grid))
    return best


@dataclass
class QuasiStabilityTerms:
    """Ingredients of the trajectory-pair contraction inequality.

    For each sample time, ``diff_norm_sq`` is the squared state-norm distance
    between the two trajectories and ``sup_lower_order`` the running supremum
    of the compact lower-order seminorm (squared L^{2p} norms of the
    displacement differences).
    """

    times: np.ndarray
    diff_norm_sq: np.ndarray
    lower_order: np.ndarray
    sup_lower_order: np.ndarray


def quasi_stability_terms(t1: Trajectory, t2: Trajectory,
                          params: BeamParameters, sources: SourceSpec,
                          ops: DiscreteOperatorSet | None = None) -> QuasiStabilityTerms:
    if t1.grid != t2.grid or t1.n_samples != t2.n_samples \
            or not np.allclose(t1.times, t2.times):
        raise GridMismatch("trajectory pair must share grid and sample times")
    grid = t1.grid
    if ops is None:
        ops = build_operators(params, grid)
    p = max(1.0, sources.p)
    ns = t1.n_samples
    dn = np.empty(ns)
    lot = np.empty(ns)
    for i in range(ns):
        za, zb = t1.state(i), t2.state(i)
        diff = StateZ(*(a - b for a, b in zip(za.as_array(), zb.as_array())))
        dn[i] = h_norm_squared(diff, params, grid, ops)
        acc = 0.0
        for d in (diff.phi, diff.psi, diff.w):
            acc += (grid.h * float(np.sum(np.abs(d) ** (2 * p)))) ** (1.0 / p)
        lot[i] = acc
    return QuasiStabilityTerms(times=t1.times.copy(), diff_norm_sq=dn,
                               lower_order=lot,
                               sup_lower_order=np.maximum.accumulate(lot))


def check_quasi_stability(terms: QuasiStabilityTerms, omega: float,
                          c1: float, c2: float, rtol: float = 1e-9) -> np.ndarray:
    """Pointwise verdicts of diff(t) <= c1 e^{-omega t} diff(0) + c2 sup_lot(t)."""
    rhs = (c1 * np.exp(-omega * terms.times) * terms.diff_norm_sq[0]
           + c2 * terms.sup_lower_order)
    return terms.diff_norm_sq <= rhs * (1.0 + rtol) + 1e-300


def fit_quasi_stability(pairs: list, omega_floor: float = 1e-3) -> tuple[float, float, float]:
    """Smallest uniform (c1, omega, c2) making the contraction inequality hold
    on every sample of every supplied :class:`QuasiStabilityTerms`.

    omega is fitted from the fastest common exponential envelope of the
    homogeneous parts; c2 is then the smallest multiplier absorbing the rest.
    """
    if not pairs:
        raise ValueError("need at least one trajectory pair")
    # fit omega from the pair with the cleanest pure decay (smallest lot share)
    omegas = []
    for terms in pairs:
        d0 = terms.diff_norm_sq[0]
        if d0 <= 0:
            continue
        mask = terms.diff_norm_sq > 1e-14 * d0
        if mask.sum() >= 3:
            fit = np.polyfit(terms.times[mask],
                             np.log(terms.diff_norm_sq[mask] / d0), 1)
            omegas.append(max(omega_floor, -float(fit[0])))
    omega = min(omegas) if omegas else omega_floor

    c1 = 1.0
    c2 = 0.0
    for terms in pairs:
        d0 = terms.diff_norm_sq[0]
        env = np.exp(-omega * terms.times) * d0
        for dn, e, lot in zip(terms.diff_norm_sq, env, terms.sup_lower_order):
            if dn <= c1 * e + c2 * lot:
                continue
            if lot > 0:
                c2 = max(c2, (dn - c1 * e) / lot)
            else:
                c1 = max(c1, dn / max(e, 1e-300))
    return c1, omega, c2


# ---------------------------------------------------------------------------
# spectral oracle
# ---------------------------------------------------------------------------


def generator_matrix(params: BeamParameters, damping: DampingSpec,
                     grid: Grid, ops: DiscreteOperatorSet | None = None) -> np.ndarray:
    """First-order generator of the damped dynamics linearized at rest."""
    if ops is None:
        ops = build_operators(params, grid)
    n = grid.n
    A = np.zeros((6 * n, 6 * n))
    A[:3 * n, 3 * n:] = np.eye(3 * n)
    A[3 * n:, :3 * n] = -ops.stiffness / ops.mass[:, None]
    a = damping.sample(grid.nodes)
    g0 = np.concatenate([np.full(n, float(law.dg(np.array(0.0))))
                         for law in damping.laws])
    rho = np.repeat(np.array([params.rho1, params.rho2, params.rho1]), n)
    A[3 * n:, 3 * n:] = -np.diag(a.ravel() * g0 / rho)
    return A


def decay_rate_oracle(params: BeamParameters, damping: DampingSpec,
                      grid: Grid) -> float:
    """Energy decay rate of the linearized damped system: twice the spectral
    abscissa magnitude of the generator (energy is quadratic in the state)."""
    A = generator_matrix(params, damping, grid)
    eigs = scipy.linalg.eigvals(A)
    abscissa = float(np.max(eigs.real))
    return 2.0 * abs(abscissa)
