"""Magnitude, the complex-power family M_X(R, nu) and Brylinski beta functions.

Finite metric spaces and homogeneous spaces given by their radial distance
law, exact formal machinery for asymptotic expansions, analytic
continuation of beta functions and a numerical expansion oracle.
"""
from .beta import (MeromorphicEvaluator, beta_direct, beta_evaluator, beta_finite,
                   beta_padic_closed, beta_sphere_closed, beta_via_mellin,
                   closed_form_evaluator, default_expansion, mellin_transform,
                   scan_poles)
from .errors import MaglabError
from .fit import FitReport, detect_gamma, fit_expansion, verify_thm2
from .formal import (AsymptoticExpansion, GTable, NuPolynomial, PoleReport, Surd,
                     alpha_to_magnitude, eval_g, expansion_from_residues, gj_table,
                     magnitude_to_alpha, power_expansion, residues_from_expansion,
                     shift_nu, taylor_coeffs)
from .kernels import (contour_residue, integrate_decaying, integrate_finite,
                      log_gamma, principal_pow, recip_gamma)
from .magnitude import (finite_mag_nu, finite_magnitude, finite_spectrum,
                        finite_weight, little_m, mag_nu_radial, magnitude_radial)
from .spaces import (FiniteMetricSpace, RadialProfile, finite_from_points,
                     load_finite_space, padic_profile, parse_space_selector,
                     sphere_profile, two_point_homogeneous_profile, validate_metric)

__all__ = [
    "AsymptoticExpansion",
    "FiniteMetricSpace",
    "FitReport",
    "GTable",
    "MaglabError",
    "MeromorphicEvaluator",
    "NuPolynomial",
    "PoleReport",
    "RadialProfile",
    "Surd",
    "alpha_to_magnitude",
    "beta_direct",
    "beta_evaluator",
    "beta_finite",
    "beta_padic_closed",
    "beta_sphere_closed",
    "beta_via_mellin",
    "closed_form_evaluator",
    "contour_residue",
    "default_expansion",
    "detect_gamma",
    "eval_g",
    "expansion_from_residues",
    "finite_from_points",
    "finite_mag_nu",
    "finite_magnitude",
    "finite_spectrum",
    "finite_weight",
    "fit_expansion",
    "gj_table",
    "integrate_decaying",
    "integrate_finite",
    "little_m",
    "load_finite_space",
    "log_gamma",
    "mag_nu_radial",
    "magnitude_radial",
    "magnitude_to_alpha",
    "mellin_transform",
    "padic_profile",
    "parse_space_selector",
    "power_expansion",
    "principal_pow",
    "recip_gamma",
    "residues_from_expansion",
    "scan_poles",
    "shift_nu",
    "sphere_profile",
    "taylor_coeffs",
    "two_point_homogeneous_profile",
    "validate_metric",
    "verify_thm2",
]

__version__ = "0.1.0"
