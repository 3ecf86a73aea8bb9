"""Numerical laboratory for a semilinear arched-beam system with localized
nonlinear damping: energy-exact time integration, stationary analysis,
pseudo-convex weight machinery, and observability experiments."""

from .errors import (AssumptionViolated, BresseLabError, ConfigError,
                     ConstraintViolation, EmptyDampingIntersection,
                     EmptyStationarySet, EmptyWindow, GridMismatch,
                     Infeasible, LengthMismatch, NewtonDiverged,
                     NonmonotoneDamping, NonpositiveEnergy, OutOfDomain,
                     SingularForm, SingularJacobian, TooCoarse)
from .model import (BeamParameters, DAMPING_LAWS, DampingLaw, DampingSpec,
                    Localizer, SOURCE_CATALOG, SourceSpec, ValidationReport,
                    WaveSpeeds, equal_speed_check, localized_damping,
                    make_damping_law, make_source, no_damping,
                    poincare_constant, uniform_damping, validate)
from .discretize import (DiscreteOperatorSet, Grid, StateZ,
                         beta_constant_discrete, build_grid, build_operators,
                         discrete_F_energy, elastic_energy, h_distance,
                         h_norm_squared)
from .evolve import (IntegratorConfig, LinearCoupledSystem, LinearTrajectory,
                     MidpointStepper, OmegaConstraint, Trajectory,
                     bresse_linearized_couplings, coupling_growth_constant,
                     default_dt, make_linear_system, simulate,
                     simulate_constrained, simulate_linear_coupled, step)
from .stationary import (StationarySolution, enumerate_stationary,
                         gradient_norm_squared, solve_stationary,
                         stationary_bound)
from .diagnostics import (DecayFit, EnergyReport, QuasiStabilityTerms,
                          check_quasi_stability, decay_rate_oracle,
                          distance_to_stationary, energy_report,
                          fit_decay_rate, fit_quasi_stability,
                          generator_matrix, quasi_stability_terms)
from .carleman import (CarlemanCheckReport, CarlemanSetup, SigmaWindow,
                       TimeParameters, UcpReport, boundary_term,
                       carleman_inequality_check, cutoff, d_weight,
                       kij_values, make_setup, q_sigma_membership,
                       rescale_factor, select_time_parameters,
                       sigma_window, simulate_cutoff_subsystems,
                       ucp_experiment, verify_setup, weight_eval,
                       window_inside_q_sigma)
from .cli import ScenarioConfig, load_config, main, parse_config, run_scenario

__version__ = "1.0.0"
