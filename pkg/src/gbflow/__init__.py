"""Grain-boundary curve shortening with a misorientation-dependent mobility.

Solvers for periodic graphs and closed curves, a backward heat kernel with
time-dependent conductivity, and diagnostics that check energy dissipation,
weighted monotonicity, a priori bounds and decay rates along computed runs.
"""

__version__ = "0.1.0"

from .curve_solver import (CurveState, ExtinctionReport, circle, ellipse,  # noqa: E402
                           line_tension_residual, polygon_geometry, run_curve, step_curve)
from .diagnostics import (CheckReport, WeightFunction, asymptotics_report,  # noqa: E402
                          bound_checks, decay_fit, dissipation_residual,
                          length_dissipation_check, monotonicity_series)
from .errors import (CFLViolation, ConfigurationError, DiagnosticError,  # noqa: E402
                     DivergenceError, FitError, GBFlowError, GeometryError,
                     KernelDomainError, SingularSystemError)
from .geometry import (GraphState, Grid1D, area_element, curvature,  # noqa: E402
                       curve_length, d1, d2, energy, sobolev_norms)
from .graph_solver import Params, run, stable_dt, step  # noqa: E402
from .kernel import (BackwardKernel, grad_rho, hess_rho, kernel_identity_residual,  # noqa: E402
                     rho, sigma_accum)
from .sigma import AnisotropicSigma, SigmaKind, SigmaModel, stiffness  # noqa: E402
from .trajectory import Trajectory  # noqa: E402

__all__ = [
    "AnisotropicSigma", "BackwardKernel", "CFLViolation", "CheckReport", "ConfigurationError",
    "CurveState", "DiagnosticError", "DivergenceError", "ExtinctionReport", "FitError",
    "GBFlowError", "GeometryError", "GraphState", "Grid1D", "KernelDomainError", "Params",
    "SigmaKind", "SigmaModel", "SingularSystemError", "Trajectory", "WeightFunction",
    "area_element", "asymptotics_report", "bound_checks", "circle", "curvature",
    "curve_length", "d1", "d2", "decay_fit", "dissipation_residual", "ellipse", "energy",
    "grad_rho", "hess_rho", "kernel_identity_residual", "length_dissipation_check",
    "line_tension_residual", "monotonicity_series", "polygon_geometry", "rho", "run",
    "run_curve", "sigma_accum", "sobolev_norms", "stable_dt", "step", "step_curve",
    "stiffness",
]
