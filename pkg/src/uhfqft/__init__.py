"""Numerical toolkit for a nonlocal Dirac field model with exponential Wick interactions."""

from .errors import (AlgebraError, BranchError, BudgetError, ConvergenceError, DomainError,
                     EmptyWindowError, MarginError, MarginWarning, MissingChannelError,
                     PreconditionError, RadiusError, SingularityError, SizeMismatchError, UHFError)
from .propagator import (ComplexFourVector, QuadratureConfig, boundary_grad, boundary_value,
                         bound_estimate, d_minus, d_minus_decomposed, d_minus_grad,
                         d_minus_grad_decomposed, dist_to_lightcone, ell_fundamental,
                         epsilon_deform, g_m, light_cone_a)
from .wickcomb import (PairingMatrix, WickSeries, exp_vev_closed, jaffe_vev, mixed_jaffe_vev,
                       monomial_vev_oracle, sigma_growth)
from .gaussmodel import (ContourSpec, apply_functional_2pt, build_A, chi_inv, chi_map,
                         deq_residual, det_inv_sqrt, q_perturbation, rho_vev, rho_vev_series)
from .diracfree import (GammaBasis, dirac_npoint, full_model_vev, gamma_check, s_minus,
                        sbar_minus)
from .causality import antisym_check_2pt, carrier_margin, deform_invariance, jost_symmetry
from .localize1d import (DeltaSeries, StripTestFunction, delta_series_apply,
                         localization_report, taylor_coeffs)

__version__ = "0.1.0"

__all__ = [
    "AlgebraError", "BranchError", "BudgetError", "ConvergenceError", "DomainError",
    "EmptyWindowError", "MarginError", "MarginWarning", "MissingChannelError", "PreconditionError",
    "RadiusError", "SingularityError", "SizeMismatchError", "UHFError", "ComplexFourVector",
    "QuadratureConfig", "boundary_grad", "boundary_value", "bound_estimate", "d_minus",
    "d_minus_decomposed", "d_minus_grad", "d_minus_grad_decomposed", "dist_to_lightcone",
    "ell_fundamental", "epsilon_deform", "g_m", "light_cone_a", "PairingMatrix", "WickSeries",
    "exp_vev_closed", "jaffe_vev", "mixed_jaffe_vev", "monomial_vev_oracle", "sigma_growth",
    "ContourSpec", "apply_functional_2pt", "build_A", "chi_inv", "chi_map", "deq_residual",
    "det_inv_sqrt", "q_perturbation", "rho_vev", "rho_vev_series", "GammaBasis", "dirac_npoint",
    "full_model_vev", "gamma_check", "s_minus", "sbar_minus", "antisym_check_2pt",
    "carrier_margin", "deform_invariance", "jost_symmetry", "DeltaSeries", "StripTestFunction",
    "delta_series_apply", "localization_report", "taylor_coeffs",
]
