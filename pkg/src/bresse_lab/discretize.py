"""Uniform-grid discretization with zero Dirichlet boundaries.

Interior nodes x_j = j h, j = 1..n, h = L/(n+1).  First derivatives live on the
n+1 cell edges (forward differences with zero ghosts); zeroth-order fields are
averaged onto edges.  With this pairing the discrete elastic energy is an exact
quadratic form whose gradient is the discrete elastic operator, so summation by
parts -- and hence the semi-discrete energy identity -- holds to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import LengthMismatch, SingularForm, TooCoarse
from .model import BeamParameters, SourceSpec


@dataclass(frozen=True)
class Grid:
    """Uniform interior grid on (0, L)."""

    length: float
    n: int
    h: float
    nodes: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.length == other.length
                and self.n == other.n)


def build_grid(length: float, n: int) -> Grid:
    if n < 3:
        raise TooCoarse(f"need at least 3 interior nodes, got {n}")
    if length <= 0:
        raise ValueError("length must be positive")
    h = length / (n + 1)
    nodes = h * np.arange(1, n + 1)
    return Grid(length=length, n=n, h=h, nodes=nodes)


@dataclass
class StateZ:
    """Six interior-node fields: displacements and velocities."""

    phi: np.ndarray
    psi: np.ndarray
    w: np.ndarray
    phi_t: np.ndarray
    psi_t: np.ndarray
    w_t: np.ndarray

    def __post_init__(self):
        n = len(self.phi)
        for f in (self.psi, self.w, self.phi_t, self.psi_t, self.w_t):
            if len(f) != n:
                raise LengthMismatch("state fields must share one grid length")

    @classmethod
    def zero(cls, grid: Grid) -> "StateZ":
        z = np.zeros(grid.n)
        return cls(z.copy(), z.copy(), z.copy(), z.copy(), z.copy(), z.copy())

    @classmethod
    def from_vector(cls, y: np.ndarray, n: int) -> "StateZ":
        y = np.asarray(y, dtype=float)
        return cls(*(y[i * n:(i + 1) * n].copy() for i in range(6)))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.phi, self.psi, self.w,
                               self.phi_t, self.psi_t, self.w_t])

    def as_array(self) -> np.ndarray:
        return np.stack([self.phi, self.psi, self.w,
                         self.phi_t, self.psi_t, self.w_t])

    @property
    def displacements(self) -> np.ndarray:
        return np.concatenate([self.phi, self.psi, self.w])

    @property
    def velocities(self) -> np.ndarray:
        return np.concatenate([self.phi_t, self.psi_t, self.w_t])


# ---------------------------------------------------------------------------
# elementary operators
# ---------------------------------------------------------------------------


def forward_diff_matrix(grid: Grid) -> np.ndarray:
    """(n+1) x n edge-difference matrix with zero Dirichlet ghosts."""
    n, h = grid.n, grid.h
    D = np.zeros((n + 1, n))
    idx = np.arange(n)
    D[idx, idx] = 1.0 / h
    D[idx + 1, idx] = -1.0 / h
    return D


def edge_average_matrix(grid: Grid) -> np.ndarray:
    """(n+1) x n edge-midpoint average with zero Dirichlet ghosts."""
    n = grid.n
    A = np.zeros((n + 1, n))
    idx = np.arange(n)
    A[idx, idx] = 0.5
    A[idx + 1, idx] = 0.5
    return A


def centered_diff_matrix(grid: Grid) -> np.ndarray:
    """n x n centered first derivative with zero ghosts."""
    n, h = grid.n, grid.h
    C = np.zeros((n, n))
    i = np.arange(n - 1)
    C[i, i + 1] = 1.0 / (2 * h)
    C[i + 1, i] = -1.0 / (2 * h)
    return C


def laplacian_matrix(gamma: float, grid: Grid) -> np.ndarray:
    """gamma-scaled 3-point Laplacian with zero Dirichlet ghosts."""
    n, h = grid.n, grid.h
    L = np.zeros((n, n))
    i = np.arange(n)
    L[i, i] = -2.0
    j = np.arange(n - 1)
    L[j, j + 1] = 1.0
    L[j + 1, j] = 1.0
    return gamma / h ** 2 * L


def apply_laplacian(gamma: float, u: np.ndarray, grid: Grid) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if len(u) != grid.n:
        raise LengthMismatch(f"vector length {len(u)} != grid size {grid.n}")
    out = np.empty_like(u)
    out[:] = -2.0 * u
    out[:-1] += u[1:]
    out[1:] += u[:-1]
    return gamma / grid.h ** 2 * out


def forward_diff(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Edge differences (u_{j+1} - u_j)/h, ghosts zero; length n+1."""
    u = np.asarray(u, dtype=float)
    if len(u) != grid.n:
        raise LengthMismatch(f"vector length {len(u)} != grid size {grid.n}")
    padded = np.concatenate([[0.0], u, [0.0]])
    return np.diff(padded) / grid.h


def edge_average(u: np.ndarray, grid: Grid) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if len(u) != grid.n:
        raise LengthMismatch(f"vector length {len(u)} != grid size {grid.n}")
    padded = np.concatenate([[0.0], u, [0.0]])
    return 0.5 * (padded[:-1] + padded[1:])


# ---------------------------------------------------------------------------
# assembled operator set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteOperatorSet:
    """Stiffness/mass operators of the coupled elastic system on one grid.

    ``stiffness`` is the 3n x 3n symmetric positive definite matrix K with
    U^T K U = h * sum over edges of
    b (D psi)^2 + k (D phi + avg psi + ell avg w)^2 + k0 (D w - ell avg phi)^2,
    i.e. the elastic part of the squared state norm.  The nodal elastic force
    is (1/2) grad of that form = K U.
    """

    grid: Grid
    params: BeamParameters
    stiffness: np.ndarray       # 3n x 3n, K
    mass: np.ndarray            # length 3n, h-weighted densities
    shear_strain: np.ndarray    # (n+1) x 3n
    bend_strain: np.ndarray     # (n+1) x 3n
    axial_strain: np.ndarray    # (n+1) x 3n


def build_operators(params: BeamParameters, grid: Grid) -> DiscreteOperatorSet:
    n = grid.n
    D = forward_diff_matrix(grid)
    A = edge_average_matrix(grid)
    Z = np.zeros_like(D)
    ell = params.ell

    Bs = np.hstack([D, A, ell * A])          # shear: phi_x + psi + ell w
    Bb = np.hstack([Z, D, Z])                # bending: psi_x
    Bn = np.hstack([-ell * A, Z, D])         # axial: w_x - ell phi

    K = grid.h * (params.b * Bb.T @ Bb + params.k * Bs.T @ Bs
                  + params.k0 * Bn.T @ Bn)
    K = 0.5 * (K + K.T)
    mass = grid.h * np.concatenate([np.full(n, params.rho1),
                                    np.full(n, params.rho2),
                                    np.full(n, params.rho1)])
    return DiscreteOperatorSet(grid=grid, params=params, stiffness=K, mass=mass,
                               shear_strain=Bs, bend_strain=Bb, axial_strain=Bn)


def elastic_energy(U: np.ndarray, ops: DiscreteOperatorSet) -> float:
    """Elastic part of the squared state norm (no 1/2 factor)."""
    return float(U @ (ops.stiffness @ U))


def h_norm_squared(z: StateZ, params: BeamParameters, grid: Grid,
                   ops: DiscreteOperatorSet | None = None) -> float:
    """Discrete squared state norm: rho-weighted kinetic part plus the elastic
    quadratic form; derivative terms use the edge stencils so summation by
    parts is exact."""
    h = grid.h
    kin = h * (params.rho1 * np.dot(z.phi_t, z.phi_t)
               + params.rho2 * np.dot(z.psi_t, z.psi_t)
               + params.rho1 * np.dot(z.w_t, z.w_t))
    if ops is not None:
        return kin + elastic_energy(z.displacements, ops)
    dphi = forward_diff(z.phi, grid)
    dpsi = forward_diff(z.psi, grid)
    dw = forward_diff(z.w, grid)
    psi_e = edge_average(z.psi, grid)
    phi_e = edge_average(z.phi, grid)
    w_e = edge_average(z.w, grid)
    shear = dphi + psi_e + params.ell * w_e
    axial = dw - params.ell * phi_e
    elastic = h * (params.b * np.dot(dpsi, dpsi)
                   + params.k * np.dot(shear, shear)
                   + params.k0 * np.dot(axial, axial))
    return kin + elastic


def gradient_form_matrix(grid: Grid) -> np.ndarray:
    """3n x 3n matrix G with U^T G U = h sum of squared edge differences of the
    three displacement fields (the discrete ||phi_x||^2 + ||psi_x||^2 + ||w_x||^2)."""
    D = forward_diff_matrix(grid)
    blk = grid.h * D.T @ D
    G = scipy.linalg.block_diag(blk, blk, blk)
    return 0.5 * (G + G.T)


def beta_constant_discrete(params: BeamParameters, grid: Grid,
                           ops: DiscreteOperatorSet | None = None) -> float:
    """Smallest beta with gradient form <= beta * elastic form over all nonzero
    displacement triples; computed from the generalized eigenproblem of the two
    quadratic forms."""
    if ops is None:
        ops = build_operators(params, grid)
    K = ops.stiffness
    G = gradient_form_matrix(grid)
    eigs_K = scipy.linalg.eigvalsh(K)
    if eigs_K[0] <= 1e-12 * max(1.0, eigs_K[-1]):
        raise SingularForm(
            f"elastic form nearly singular: smallest eigenvalue {eigs_K[0]:.3g}")
    mu = scipy.linalg.eigvalsh(G, K)
    return float(mu[-1])


def discrete_F_energy(phi: np.ndarray, psi: np.ndarray, w: np.ndarray,
                      sources: SourceSpec, grid: Grid) -> float:
    """Trapezoid quadrature of the potential density over (0, L); boundary
    nodes carry the zero-state value of F."""
    vals = sources.potential(np.asarray(phi, float), np.asarray(psi, float),
                             np.asarray(w, float))
    f0 = float(sources.potential(np.array(0.0), np.array(0.0), np.array(0.0)))
    return grid.h * (float(np.sum(vals)) + f0)


def h_distance(z1: StateZ, z2: StateZ, params: BeamParameters, grid: Grid) -> float:
    """State-norm distance between two states on the same grid."""
    diff = StateZ(*(a - b for a, b in zip(z1.as_array(), z2.as_array())))
    return float(np.sqrt(h_norm_squared(diff, params, grid)))
