"""Flux reconstruction on summation-by-parts operators for 1D linear advection,
with long-time error diagnostics."""

from .basis import BasisKind, NodalBasis, Side, correction_function, interpolate, lambda_p, legendre_eval
from .operators import InadmissibleKappa, SbpOperators, Scheme, kappa_lower_bound, kappa_value, verify_sbp
from .scheme import FluxConfig, Mesh, SolutionState, TestCase, init_state, numerical_flux, rhs
from .timeint import DivergenceError, TimeConfig, integrate, pick_dt, ssprk33_step

__all__ = [
    "BasisKind",
    "DivergenceError",
    "FluxConfig",
    "InadmissibleKappa",
    "Mesh",
    "NodalBasis",
    "SbpOperators",
    "Scheme",
    "Side",
    "SolutionState",
    "TestCase",
    "TimeConfig",
    "correction_function",
    "init_state",
    "integrate",
    "interpolate",
    "kappa_lower_bound",
    "kappa_value",
    "lambda_p",
    "legendre_eval",
    "numerical_flux",
    "pick_dt",
    "rhs",
    "ssprk33_step",
    "verify_sbp",
]
