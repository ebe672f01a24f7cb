"""Moment, slicing and distance functionals of star bodies, checked numerically."""
from .quad import (IntegrationConfig, ValueWithError, SpecError, DegenerateDensityError,
                   spherical_constant, sphere_integrate, body_integrate, section_integrate,
                   profile_g, sphere_area)
from .bodies import (StarBody, make_lq_ball, make_cube, make_cross_polytope, make_ellipsoid,
                     make_custom, gauge, radial, contains_point, volume, body_from_spec)
from .densities import (Density, DirectionMeasure, make_density, make_custom_density,
                        gauge_from_measure, lp_ball_measure, euclidean_ball_measure,
                        ellipsoid_measure, total_mass)
from .moments import MomentResult, moment, min_moment, gamma_ratio, moment_ratio
from .slicing import (SlicingReport, max_section, slicing_constant, moment_functional,
                      section_moment_check, slicing_ratio, StepFunction, monotonic_q)
from .distances import (Witness, DistanceReport, contains_body, dovr_upper, dbm_scaling,
                        jensen_check, bp_compare, euclidean_witness, lp_ball_witness,
                        ellipsoid_witness, john_witnesses)

__version__ = "0.1.0"

__all__ = [
    "IntegrationConfig", "ValueWithError", "SpecError", "DegenerateDensityError",
    "spherical_constant", "sphere_integrate", "body_integrate", "section_integrate",
    "profile_g", "sphere_area",
    "StarBody", "make_lq_ball", "make_cube", "make_cross_polytope", "make_ellipsoid",
    "make_custom", "gauge", "radial", "contains_point", "volume", "body_from_spec",
    "Density", "DirectionMeasure", "make_density", "make_custom_density",
    "gauge_from_measure", "lp_ball_measure", "euclidean_ball_measure",
    "ellipsoid_measure", "total_mass",
    "MomentResult", "moment", "min_moment", "gamma_ratio", "moment_ratio",
    "SlicingReport", "max_section", "slicing_constant", "moment_functional",
    "section_moment_check", "slicing_ratio", "StepFunction", "monotonic_q",
    "Witness", "DistanceReport", "contains_body", "dovr_upper", "dbm_scaling",
    "jensen_check", "bp_compare", "euclidean_witness", "lp_ball_witness",
    "ellipsoid_witness", "john_witnesses",
]
