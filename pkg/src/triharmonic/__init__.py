"""Barriers, radial evolution and far-field fits for ``(-Delta)^3 u = u^p``."""

from .exponents import (Problem, decay_constants, jl_exponent, k0k1, parse_exponent,
                        q_of_m, sobolev_exponent)
from .radial import (PowerLogSum, PowerLogTerm, binomial_cp, evaluate, radial_laplacian,
                     triharmonic_residual)
from .spectrum import Spectrum, characteristic_value, reduce_to_cubic, solve_spectrum

__version__ = "0.1.0"

__all__ = [
    "Problem",
    "PowerLogSum",
    "PowerLogTerm",
    "Spectrum",
    "binomial_cp",
    "characteristic_value",
    "decay_constants",
    "evaluate",
    "jl_exponent",
    "k0k1",
    "parse_exponent",
    "q_of_m",
    "radial_laplacian",
    "reduce_to_cubic",
    "sobolev_exponent",
    "solve_spectrum",
    "triharmonic_residual",
]
