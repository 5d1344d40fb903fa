"""Numerical laboratory for u'' + gamma(t) u' + A u + f(u) = g(t) with vanishing damping."""

from .errors import (ConfigError, DivergentIntegralError, MinimizerError, PreconditionError,
                     StabilityError, VandampError)
from .problem import (ConvexProblem, DampingSchedule, NormTriple, ScalarNonlinearity, SourceTerm,
                      SymmetricOperator, build_wave_problem, check_damping, classify_source,
                      compute_minimizer, flat_basin_problem, interpolation_constant, make_problem, quadratic_problem,
                      shifted_quartic_problem, source_weighted_integral, validate_problem)
from .dynamics import IntegratorConfig, TrajectoryState, default_initial, integrate, reference_solve, stable_dt
from .diagnostics import (EnergyRecord, anchor, anchor_limit_check, big_gamma, cauchy_check, decay_fit, energy, energy_derivative_residual,
                          gradient_integral_verdict, lemma1_check, limit_candidate_check, modified_energy,
                          monotonicity_violations, scaled_energy_trend, tau0, velocity_integral_verdict)
from .runner import ScenarioConfig, emit_csv, parse_config, read_csv, run_scenario, run_suite

__version__ = "0.1.0"
