"""Exception types shared across the package."""


class BresseLabError(Exception):
    """Base class for all package-specific errors."""


class EmptyDampingIntersection(BresseLabError):
    """The three damping intervals have empty common intersection."""


class NonmonotoneDamping(BresseLabError):
    """A sampled damping nonlinearity has negative slope."""


class TooCoarse(BresseLabError):
    """Grid has fewer than 3 interior nodes."""


class LengthMismatch(BresseLabError):
    """Vector length does not match the grid."""


class GridMismatch(BresseLabError):
    """Two trajectories do not share grid or sample times."""


class SingularForm(BresseLabError):
    """The elastic quadratic form has a (near-)nontrivial kernel."""


class NewtonDiverged(BresseLabError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message, step_index=None, residual=None):
        super().__init__(message)
        self.step_index = step_index
        self.residual = residual


class SingularJacobian(BresseLabError):
    """Newton Jacobian is numerically singular."""

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class ConstraintViolation(BresseLabError):
    """Initial state is nonzero on the constrained node set."""


class AssumptionViolated(BresseLabError):
    """A standing assumption required by a formula does not hold."""


class EmptyStationarySet(BresseLabError):
    """distance-to-stationary called with no stationary states."""


class NonpositiveEnergy(BresseLabError):
    """Log-fit window contains nonpositive energy samples."""


class EmptyWindow(BresseLabError):
    """No time window exists at the requested weight level."""


class Infeasible(BresseLabError):
    """No admissible (c, delta) pair exists for the chosen horizon."""


class OutOfDomain(BresseLabError):
    """Evaluation point outside the weight's subdomain or time range."""


class ConfigError(BresseLabError):
    """Config file unreadable or inconsistent."""
