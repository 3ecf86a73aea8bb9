"""Physical data of the arched-beam system and validation of its standing assumptions.

The model consists of three blocks:

* :class:`BeamParameters` -- the positive material constants of the three
  coupled wave equations (curvature ``ell = 0`` degenerates to a straight
  Timoshenko beam).
* :class:`DampingSpec` -- localized nonlinear damping ``a_i(x) g_i(s)``
  built from a small named catalog of monotone nonlinearities.
* :class:`SourceSpec` -- a potential ``F(u, v, w)`` with gradient
  ``(f_1, f_2, f_3)``, also chosen from a named catalog.

``validate`` samples the assumption inequalities on a deterministic grid and
reports pass/fail with a witnessing point on failure; symbolic verification is
out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyDampingIntersection, NonmonotoneDamping


@dataclass(frozen=True)
class BeamParameters:
    """Positive constants of the beam: densities, stiffnesses, curvature, length."""

    rho1: float = 1.0
    rho2: float = 1.0
    k: float = 1.0
    k0: float = 1.0
    b: float = 1.0
    ell: float = 0.5
    length: float = 1.0

    def __post_init__(self):
        for name in ("rho1", "rho2", "k", "k0", "b", "length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.ell < 0:
            raise ValueError("ell must be nonnegative")

    @property
    def is_timoshenko(self) -> bool:
        """True in the straight-beam degeneration (zero curvature)."""
        return self.ell == 0.0


@dataclass(frozen=True)
class WaveSpeeds:
    """Squared propagation speeds of the three wave components."""

    gamma1: float
    gamma2: float
    gamma3: float

    @classmethod
    def from_params(cls, params: BeamParameters) -> "WaveSpeeds":
        return cls(
            gamma1=params.k / params.rho1,
            gamma2=params.b / params.rho2,
            gamma3=params.k0 / params.rho1,
        )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.gamma1, self.gamma2, self.gamma3)


# ---------------------------------------------------------------------------
# damping catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DampingLaw:
    """Scalar monotone nonlinearity ``g`` with reported slope bounds [m, M]."""

    name: str
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    slope_min: float
    slope_max: float


def _linear_law() -> DampingLaw:
    return DampingLaw("linear", g=lambda s: np.asarray(s, dtype=float),
                      dg=lambda s: np.ones_like(np.asarray(s, dtype=float)),
                      slope_min=1.0, slope_max=1.0)


def _linear_tanh_law() -> DampingLaw:
    # g(s) = s + 0.5 tanh(s); g'(s) = 1 + 0.5(1 - tanh^2 s) in (1, 1.5]
    return DampingLaw(
        "linear_tanh",
        g=lambda s: s + 0.5 * np.tanh(s),
        dg=lambda s: 1.0 + 0.5 * (1.0 - np.tanh(s) ** 2),
        slope_min=1.0,
        slope_max=1.5,
    )


DAMPING_LAWS: dict[str, Callable[[], DampingLaw]] = {
    "linear": _linear_law,
    "linear_tanh": _linear_tanh_law,
}


def make_damping_law(name: str) -> DampingLaw:
    try:
        return DAMPING_LAWS[name]()
    except KeyError:
        raise KeyError(f"unknown damping law {name!r}; options: {sorted(DAMPING_LAWS)}")


@dataclass(frozen=True)
class Localizer:
    """Nonnegative coefficient a(x): ``amplitude`` on ``interval``, ``base`` outside."""

    interval: tuple[float, float]
    amplitude: float = 1.0
    base: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0 or self.base < 0:
            raise ValueError("localizer values must be nonnegative")
        lo, hi = self.interval
        if hi <= lo:
            raise ValueError("localizer interval must be nondegenerate")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval
        return np.where((x > lo) & (x < hi), self.amplitude, self.base)


@dataclass(frozen=True)
class DampingSpec:
    """Three localizers and three catalog nonlinearities."""

    laws: tuple[DampingLaw, DampingLaw, DampingLaw]
    localizers: tuple[Localizer, Localizer, Localizer]

    @property
    def floor(self) -> float:
        """Common floor a0 on the respective intervals."""
        return min(loc.amplitude for loc in self.localizers)

    def intersection(self) -> tuple[float, float] | None:
        """(L1, L2) where all three localizers are active, or None if empty."""
        lo = max(loc.interval[0] for loc in self.localizers)
        hi = min(loc.interval[1] for loc in self.localizers)
        return (lo, hi) if hi > lo else None

    def sample(self, x: np.ndarray) -> np.ndarray:
        """Stack the three coefficient fields on the nodes, shape (3, len(x))."""
        return np.stack([loc(x) for loc in self.localizers])


def uniform_damping(length: float, a0: float = 1.0,
                    law: str = "linear") -> DampingSpec:
    """Damping active on the whole open interval (0, length)."""
    lw = make_damping_law(law)
    loc = Localizer(interval=(0.0, length), amplitude=a0)
    return DampingSpec(laws=(lw, lw, lw), localizers=(loc, loc, loc))


def localized_damping(intervals: Sequence[tuple[float, float]], a0: float = 1.0,
                      law: str = "linear") -> DampingSpec:
    """Damping active only on the given per-equation intervals."""
    lw = make_damping_law(law)
    locs = tuple(Localizer(interval=tuple(iv), amplitude=a0) for iv in intervals)
    if len(locs) != 3:
        raise ValueError("expected three intervals")
    return DampingSpec(laws=(lw, lw, lw), localizers=locs)


def no_damping(length: float) -> DampingSpec:
    lw = make_damping_law("linear")
    loc = Localizer(interval=(0.0, length), amplitude=0.0)
    return DampingSpec(laws=(lw, lw, lw), localizers=(loc, loc, loc))


# ---------------------------------------------------------------------------
# source catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceSpec:
    """Potential F with gradient (f1, f2, f3), growth exponent p and constants
    alpha, c_F of the lower bound F >= -alpha(|u|^2+|v|^2+|w|^2) - c_F."""

    name: str
    potential: Callable  # (u, v, w) -> array
    gradient: Callable   # (u, v, w) -> (3, ...) array
    hessian: Callable    # (u, v, w) -> (3, 3, ...) array
    p: float = 1.0
    alpha: float = 0.0
    c_F: float = 0.0

    def __call__(self, u, v, w):
        return self.potential(u, v, w)


def _zero_source() -> SourceSpec:
    def pot(u, v, w):
        return np.zeros_like(np.asarray(u, dtype=float))

    def grad(u, v, w):
        z = np.zeros_like(np.asarray(u, dtype=float))
        return np.stack([z, z, z])

    def hess(u, v, w):
        z = np.zeros_like(np.asarray(u, dtype=float))
        return np.stack([np.stack([z, z, z])] * 3)

    return SourceSpec("zero", pot, grad, hess, p=1.0, alpha=0.0, c_F=0.0)


def _power_source(coef: float = 1.0, p: float = 1.0) -> SourceSpec:
    """F = coef * (u^2+v^2+w^2)^{(p+1)/2} / (p+1); convex for coef >= 0."""
    if p < 1:
        raise ValueError("growth exponent p must be >= 1")

    def pot(u, v, w):
        r2 = u * u + v * v + w * w
        return coef * r2 ** ((p + 1) / 2) / (p + 1)

    def grad(u, v, w):
        r2 = u * u + v * v + w * w
        s = coef * r2 ** ((p - 1) / 2) if p != 1 else coef * np.ones_like(r2)
        return np.stack([s * u, s * v, s * w])

    def hess(u, v, w):
        r2 = u * u + v * v + w * w
        s = coef * r2 ** ((p - 1) / 2) if p != 1 else coef * np.ones_like(r2)
        comps = [u, v, w]
        out = np.empty((3, 3) + np.shape(r2))
        if p != 1:
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(r2 > 0, coef * (p - 1) * r2 ** ((p - 3) / 2), 0.0)
        else:
            t = np.zeros_like(r2)
        for i in range(3):
            for j in range(3):
                out[i, j] = t * comps[i] * comps[j] + (s if i == j else 0.0)
        return out

    return SourceSpec(f"power", pot, grad, hess, p=p,
                      alpha=0.0, c_F=0.0) if coef >= 0 else _indefinite_power(coef, p)


def _indefinite_power(coef: float, p: float) -> SourceSpec:
    # coef < 0: bounded below only through alpha/c_F; keep p = 1 (quadratic).
    if p != 1:
        raise ValueError("negative power coefficient only supported for p = 1")
    base = _power_source(abs(coef), 1.0)

    def pot(u, v, w):
        return -base.potential(u, v, w)

    def grad(u, v, w):
        return -base.gradient(u, v, w)

    def hess(u, v, w):
        return -base.hessian(u, v, w)

    return SourceSpec("power", pot, grad, hess, p=1.0,
                      alpha=abs(coef) / 2, c_F=0.0)


def _constant_source(c1: float = 0.0, c2: float = 0.0, c3: float = 0.0,
                     alpha: float = 0.01) -> SourceSpec:
    """Linear potential F = c1 u + c2 v + c3 w (constant forcing)."""
    c = np.array([c1, c2, c3])
    # linear F >= -alpha r^2 - c_F with c_F = |c|^2 / (4 alpha)
    c_F = float(c @ c) / (4 * alpha) if alpha > 0 else math.inf

    def pot(u, v, w):
        return c1 * u + c2 * v + c3 * w

    def grad(u, v, w):
        ones = np.ones_like(np.asarray(u, dtype=float))
        return np.stack([c1 * ones, c2 * ones, c3 * ones])

    def hess(u, v, w):
        z = np.zeros_like(np.asarray(u, dtype=float))
        return np.stack([np.stack([z, z, z])] * 3)

    return SourceSpec("constant", pot, grad, hess, p=1.0, alpha=alpha, c_F=c_F)


def _double_well_source(kappa: float = 1.0, a: float = 1.0) -> SourceSpec:
    """F = kappa (u^2 - a^2)^2: symmetric double well in the first component."""

    def pot(u, v, w):
        return kappa * (u * u - a * a) ** 2

    def grad(u, v, w):
        z = np.zeros_like(np.asarray(u, dtype=float))
        return np.stack([4 * kappa * u * (u * u - a * a), z, z])

    def hess(u, v, w):
        z = np.zeros_like(np.asarray(u, dtype=float))
        out = np.stack([np.stack([z, z, z])] * 3).copy()
        out[0, 0] = 4 * kappa * (3 * u * u - a * a)
        return out

    # grad F . z - F = 3k u^4 - 2k a^2 u^2 - k a^4 >= -(4/3) k a^4
    return SourceSpec("double_well", pot, grad, hess, p=3.0,
                      alpha=0.0, c_F=4 * kappa * a ** 4 / 3 * 1.01)


SOURCE_CATALOG: dict[str, Callable[..., SourceSpec]] = {
    "zero": _zero_source,
    "power": _power_source,
    "constant": _constant_source,
    "double_well": _double_well_source,
}


def make_source(name: str, **params) -> SourceSpec:
    try:
        factory = SOURCE_CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown source {name!r}; options: {sorted(SOURCE_CATALOG)}")
    return factory(**params)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    witness: tuple | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[AssumptionCheck] = field(default_factory=list)
    fitted_c_f: float | None = None

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _sample_states(r: float, n: int) -> np.ndarray:
    """Deterministic (3, n) sample cloud in [-r, r]^3: lattice plus seeded jitter."""
    rng = np.random.default_rng(12345)
    return rng.uniform(-r, r, size=(3, n))


def validate(params: BeamParameters, damping: DampingSpec, sources: SourceSpec,
             n_samples: int = 10_000, state_range: float = 2.0) -> ValidationReport:
    """Check the standing assumptions on a deterministic sample cloud.

    Raises :class:`EmptyDampingIntersection` / :class:`NonmonotoneDamping` for
    the two structural failures; inequality failures are reported with the
    witnessing sample.  Because the growth constant of the gradient bound is
    never fixed a priori, the report carries the smallest constant making that
    bound hold on the samples instead of a pass/fail verdict.
    """
    report = ValidationReport()

    # (a.1) localizer geometry
    if damping.intersection() is None:
        raise EmptyDampingIntersection(
            "damping intervals have empty common intersection")
    xs = np.linspace(0.0, params.length, 2001)
    a_vals = damping.sample(xs)
    ok = bool(np.all(a_vals >= 0))
    report.checks.append(AssumptionCheck("a.1", ok, detail="localizers nonnegative, "
                         f"common interval {damping.intersection()}"))

    # (g.1) monotone damping with bounded slope, g(0) = 0
    s = np.linspace(-state_range, state_range, n_samples)
    fd = 1e-6
    for i, law in enumerate(damping.laws):
        slopes = (law.g(s + fd) - law.g(s - fd)) / (2 * fd)
        if np.any(slopes < -1e-9):
            raise NonmonotoneDamping(
                f"g_{i + 1} has negative sampled slope at s={s[np.argmin(slopes)]:.4g}")
        in_range = bool(np.all(slopes >= law.slope_min - 1e-4)
                        and np.all(slopes <= law.slope_max + 1e-4))
        at_zero = abs(float(law.g(np.array(0.0)))) < 1e-14
        witness = None
        if not in_range:
            bad = int(np.argmax(np.abs(slopes - np.clip(slopes, law.slope_min,
                                                        law.slope_max))))
            witness = (float(s[bad]),)
        report.checks.append(AssumptionCheck(
            f"g.1[{i + 1}]", in_range and at_zero, witness,
            detail=f"sampled slope range [{slopes.min():.6g}, {slopes.max():.6g}]"))

    # source checks on a cloud in state space
    u, v, w = _sample_states(state_range, n_samples)
    F = sources.potential(u, v, w)
    G = sources.gradient(u, v, w)

    # (f.1) gradient consistency by central differences
    hstep = 1e-5
    ok = True
    witness = None
    worst = 0.0
    for i, delta in enumerate(np.eye(3)):
        Fp = sources.potential(u + hstep * delta[0], v + hstep * delta[1],
                               w + hstep * delta[2])
        Fm = sources.potential(u - hstep * delta[0], v - hstep * delta[1],
                               w - hstep * delta[2])
        err = np.abs((Fp - Fm) / (2 * hstep) - G[i])
        scale = 1.0 + np.abs(G[i])
        rel = err / scale
        j = int(np.argmax(rel))
        if rel[j] > worst:
            worst = float(rel[j])
            witness = (float(u[j]), float(v[j]), float(w[j]))
    if worst > 1e-5:
        ok = False
    report.checks.append(AssumptionCheck("f.1", ok, None if ok else witness,
                                         detail=f"max gradient mismatch {worst:.3g}"))

    # (f.2) lower bounds on F and on grad F . z
    r2 = u * u + v * v + w * w
    lower = -sources.alpha * r2 - sources.c_F
    margin = F - lower
    ok = bool(np.all(margin >= -1e-10 * (1 + np.abs(F))))
    j = int(np.argmin(margin))
    report.checks.append(AssumptionCheck(
        "f.2a", ok, None if ok else (float(u[j]), float(v[j]), float(w[j])),
        detail=f"min margin {margin.min():.6g}"))
    gz = G[0] * u + G[1] * v + G[2] * w
    margin2 = gz - (F - sources.alpha * r2 - sources.c_F)
    ok2 = bool(np.all(margin2 >= -1e-10 * (1 + np.abs(F))))
    j = int(np.argmin(margin2))
    report.checks.append(AssumptionCheck(
        "f.2b", ok2, None if ok2 else (float(u[j]), float(v[j]), float(w[j])),
        detail=f"min margin {margin2.min():.6g}"))

    # (f.3) polynomial growth of the gradient's derivative; report smallest c_f
    H = sources.hessian(u, v, w)
    row_norm = np.sqrt(np.sum(H * H, axis=1))  # (3, n): |grad f_i|
    p = sources.p
    bound = 1.0 + np.abs(u) ** (p - 1) + np.abs(v) ** (p - 1) + np.abs(w) ** (p - 1)
    fitted = float(np.max(row_norm / bound))
    report.fitted_c_f = fitted
    report.checks.append(AssumptionCheck(
        "f.3", True, detail=f"smallest c_f on samples: {fitted:.6g}"))

    return report


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------


def equal_speed_check(params: BeamParameters,
                      tol: float = 1e-12) -> tuple[bool, dict[str, float]]:
    """Equal-wave-speeds condition: rho1/k == rho2/b and k == k0.

    Returns the verdict and the two residuals regardless of the verdict.
    Invariant under uniform scaling of (rho1, rho2, k, k0, b).
    """
    r_speed = abs(params.rho1 / params.k - params.rho2 / params.b)
    r_stiff = abs(params.k - params.k0)
    ok = r_speed <= tol * (params.rho1 / params.k) and r_stiff <= tol * params.k
    return ok, {"speed_ratio_residual": r_speed, "stiffness_residual": r_stiff}


def poincare_constant(length: float) -> float:
    """Constant L/pi in ||u|| <= (L/pi) ||u_x|| for zero boundary values."""
    if length <= 0:
        raise ValueError("length must be positive")
    return length / math.pi
