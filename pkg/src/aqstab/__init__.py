"""Numerical laboratory for the additive-quadratic functional equation.

The package studies mappings f : X x X -> Y with small defect in

    f(x + y, z + w) + f(x - y, z - w) - 2 f(x, z) - 2 f(x, w) = 0

over beta-homogeneous F-spaces, extracts the nearby exact solution by both
the direct (scaled-iterate) and the fixed-point (scaling-operator) method,
certifies the stability bounds with explicit series tails, and audits the
printed closed-form constants and hypotheses of the underlying theory.
"""

from .audit import (CLAIM_IDS, audit_all_claims, audit_claim, check_structure,
                    direct_bound, fixpoint_claim_parameters,
                    printed_direct_constant, route_consistency,
                    verify_stability_bound)
from .config import (ALL, CLAIMS, DIRECT_DOUBLING, DIRECT_HALVING,
                     FIXPOINT_DOUBLING, FIXPOINT_HALVING, ExperimentConfig,
                     RunLimits, Tolerances, load_config, parse_config,
                     shared_beta)
from .control import (ADDITIVE_DOUBLING, ADDITIVE_HALVING, QUADRATIC_DOUBLING,
                      QUADRATIC_HALVING, SERIES_IDS, ControlFunction,
                      SeriesResult, check_doubling_condition,
                      check_halving_condition, phi_eval,
                      power_series_coefficient, power_term_ratio, series_eval,
                      smallest_lipschitz)
from .direct import (DOUBLING, FAMILY_ROUTES, HALVING, ExtractionTrace,
                     ScaledMapping, cauchy_gap_bound, extract, extract_family,
                     rassias_calibration, scaled_iterate_value, step_bound,
                     verify_gap_domination)
from .errors import (CalibrationError, ConfigError, ContractError, InputError,
                     NumericError, StructuralError)
from .fixpoint import (FixpointRun, GeneralizedDistance, contraction_factor,
                       dm_iterate, fixpoint_bound, gen_metric,
                       make_weight_probe, route_iterate, scaling_operator,
                       weight_eval)
from .fixpoint import extract_and_verify as fixpoint_extract_and_verify
from .mappings import (CoreSpec, InterpolationTable, Mapping,
                       PerturbationSpec, admissibility_check,
                       calibrate_amplitude, defect, perturbation_from_csv,
                       sgnpow)
from .pipeline import (ScenarioContext, run_scenario, run_sweep, series_table,
                       sweep_exponent)
from .reporting import (EXIT_CONFIG, EXIT_OK, EXIT_REFUSED, EXIT_VIOLATION,
                        FAIL, FLAGGED, PASS, REFUSED, AuditEntry, AuditReport)
from .sampling import SampleSet, SampleSpec, build_samples, dyadic_axis
from .spaces import (SpaceSpec, aoki_rolewicz_exponent, check_beta_homogeneity,
                     check_fnorm_axioms, induce_fnorm_from_pnorm, norm_eval,
                     quasi_constant_estimate, space_from_config,
                     space_to_config)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
