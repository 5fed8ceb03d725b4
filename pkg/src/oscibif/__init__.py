"""Exact and asymptotic bifurcation curves of -(b|u'|^2 + 1) u'' = lambda (u^p + u sin^2 u)
on (0, 1) with Dirichlet conditions."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .model import ProblemParams, f_eval, potential_F
from .timemap import CurvePoint, Profile, lambda_of_alpha, mu_of_alpha, solution_profile, time_map_G

__all__ = [
    "BACKEND",
    "CurvePoint",
    "ProblemParams",
    "Profile",
    "__version__",
    "f_eval",
    "lambda_of_alpha",
    "mu_of_alpha",
    "potential_F",
    "solution_profile",
    "time_map_G",
]
