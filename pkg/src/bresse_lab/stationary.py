"""Newton solver for the stationary elliptic system and the boundedness
estimate for the set of equilibria."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .discretize import (DiscreteOperatorSet, Grid, StateZ, build_operators,
                         beta_constant_discrete, forward_diff)
from .errors import AssumptionViolated, NewtonDiverged, SingularJacobian
from .model import BeamParameters, SourceSpec


@dataclass
class StationarySolution:
    """Displacement triple solving the stationary system, with solver record."""

    phi: np.ndarray
    psi: np.ndarray
    w: np.ndarray
    residual_norm: float
    iterations: int
    residual_history: list

    def as_state(self) -> StateZ:
        z = np.zeros_like(self.phi)
        return StateZ(self.phi.copy(), self.psi.copy(), self.w.copy(),
                      z.copy(), z.copy(), z.copy())

    @property
    def displacements(self) -> np.ndarray:
        return np.concatenate([self.phi, self.psi, self.w])


def _residual(U: np.ndarray, ops: DiscreteOperatorSet, sources: SourceSpec,
              grid: Grid) -> np.ndarray:
    """Nodal force balance: elastic force + h * source gradient."""
    n = grid.n
    grad = sources.gradient(U[:n], U[n:2 * n], U[2 * n:]).ravel()
    return ops.stiffness @ U + grid.h * grad


def _jacobian(U: np.ndarray, ops: DiscreteOperatorSet, sources: SourceSpec,
              grid: Grid) -> np.ndarray:
    n = grid.n
    H = sources.hessian(U[:n], U[n:2 * n], U[2 * n:])  # (3, 3, n)
    J = ops.stiffness.copy()
    for i in range(3):
        for j in range(3):
            J[i * n:(i + 1) * n, j * n:(j + 1) * n] += grid.h * np.diag(H[i, j])
    return J


def solve_stationary(params: BeamParameters, sources: SourceSpec, grid: Grid,
                     initial_guess: np.ndarray | None = None,
                     tol: float = 1e-12, max_iter: int = 60,
                     ops: DiscreteOperatorSet | None = None) -> StationarySolution:
    """Damped Newton on the discrete stationary system; residual measured in
    the max norm of the nodal force balance."""
    if ops is None:
        ops = build_operators(params, grid)
    n = grid.n
    U = np.zeros(3 * n) if initial_guess is None else np.asarray(
        initial_guess, dtype=float).copy()
    history = []
    r = _residual(U, ops, sources, grid)
    rn = float(np.max(np.abs(r)))
    for it in range(max_iter):
        history.append(rn)
        if rn <= tol:
            return StationarySolution(U[:n].copy(), U[n:2 * n].copy(),
                                      U[2 * n:].copy(), rn, it, history)
        J = _jacobian(U, ops, sources, grid)
        try:
            s = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            sv = np.linalg.svd(J, compute_uv=False)
            raise SingularJacobian("stationary Jacobian singular",
                                   smallest_singular_value=float(sv[-1]))
        lam = 1.0
        for _ in range(30):
            U_try = U - lam * s
            r_try = _residual(U_try, ops, sources, grid)
            rn_try = float(np.max(np.abs(r_try)))
            if rn_try < rn or rn_try <= tol:
                U, r, rn = U_try, r_try, rn_try
                break
            lam *= 0.5
        else:
            raise NewtonDiverged("stationary line search stalled",
                                 residual=rn)
    raise NewtonDiverged(f"stationary Newton: residual {rn:.3g} after "
                         f"{max_iter} iterations", residual=rn)


def stationary_bound(params: BeamParameters, sources: SourceSpec, grid: Grid,
                     beta: float | None = None) -> float:
    """Bound R^2 on the summed squared gradients of any equilibrium:
    R^2 = 2 beta c_F L / (1 - 2 alpha beta L^2 / pi^2), valid while
    alpha < pi^2 / (2 beta L^2)."""
    if beta is None:
        beta = beta_constant_discrete(params, grid)
    L = params.length
    alpha, c_F = sources.alpha, sources.c_F
    threshold = math.pi ** 2 / (2 * beta * L ** 2)
    if alpha >= threshold:
        raise AssumptionViolated(
            f"alpha={alpha:.4g} >= pi^2/(2 beta L^2)={threshold:.4g}")
    return 2 * beta * c_F * L / (1 - 2 * alpha * beta * L ** 2 / math.pi ** 2)


def gradient_norm_squared(sol: StationarySolution, grid: Grid) -> float:
    """h-weighted sum of squared edge differences of the three fields."""
    total = 0.0
    for f in (sol.phi, sol.psi, sol.w):
        d = forward_diff(f, grid)
        total += grid.h * float(np.dot(d, d))
    return total


def _h1_distance(a: StationarySolution, b: StationarySolution, grid: Grid) -> float:
    total = 0.0
    for fa, fb in ((a.phi, b.phi), (a.psi, b.psi), (a.w, b.w)):
        diff = fa - fb
        d = forward_diff(diff, grid)
        total += grid.h * (float(np.dot(diff, diff)) + float(np.dot(d, d)))
    return math.sqrt(total)


def _eigenfunction_guesses(params: BeamParameters, grid: Grid,
                           ops: DiscreteOperatorSet, n_modes: int = 3,
                           scale: float = 1.0) -> list[np.ndarray]:
    """Scaled eigenvectors of the elastic stiffness (lowest modes), both signs."""
    vals, vecs = scipy.linalg.eigh(ops.stiffness)
    guesses = []
    for m in range(min(n_modes, vecs.shape[1])):
        vec = vecs[:, m]
        amp = scale / max(1e-30, float(np.max(np.abs(vec))))
        guesses.append(amp * vec)
        guesses.append(-amp * vec)
    return guesses


def _random_smooth_guesses(grid: Grid, count: int, scale: float,
                           rng: np.random.Generator) -> list[np.ndarray]:
    """Random combinations of the first few sine modes, per field."""
    out = []
    x = grid.nodes / grid.length
    for _ in range(count):
        fields = []
        for _f in range(3):
            coef = rng.normal(scale=scale, size=4)
            fields.append(sum(c * np.sin((m + 1) * np.pi * x)
                              for m, c in enumerate(coef)))
        out.append(np.concatenate(fields))
    return out


def enumerate_stationary(params: BeamParameters, sources: SourceSpec, grid: Grid,
                         n_guesses: int = 8, tol: float = 1e-12,
                         guess_scale: float = 1.0,
                         seed: int = 0) -> list[StationarySolution]:
    """Multistart Newton: zero start, low elastic modes of both signs, and
    random smooth fields; solutions closer than 10*tol in the discrete H^1
    distance are deduplicated.  Diverged starts are skipped."""
    if n_guesses < 1:
        raise ValueError("n_guesses must be >= 1")
    ops = build_operators(params, grid)
    rng = np.random.default_rng(seed)
    guesses: list[np.ndarray | None] = [None]
    guesses += _eigenfunction_guesses(params, grid, ops, scale=guess_scale)
    extra = max(0, n_guesses - len(guesses))
    guesses += _random_smooth_guesses(grid, extra, guess_scale, rng)

    found: list[StationarySolution] = []
    for g in guesses[:max(n_guesses, 1 + 6)]:
        try:
            sol = solve_stationary(params, sources, grid, initial_guess=g,
                                   tol=tol, ops=ops)
        except (NewtonDiverged, SingularJacobian):
            continue
        if all(_h1_distance(sol, other, grid) > 10 * max(tol, 1e-9)
               for other in found):
            found.append(sol)
    return found
