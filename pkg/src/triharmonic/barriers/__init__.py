"""Sub- and super-solution barriers with exact radial derivatives."""

from .core import BarrierConstructionError, BarrierTriple, InnerPower, Piecewise
from .critical import (build_sub_critical, build_super_critical,
                       critical_coefficients)
from .supercritical import build_sub_supercritical, build_super_supercritical
from .verify import VerificationReport, verify_barrier

__all__ = [
    "BarrierConstructionError",
    "BarrierTriple",
    "InnerPower",
    "Piecewise",
    "build_sub_critical",
    "build_sub_supercritical",
    "build_super_critical",
    "critical_coefficients",
    "verify_barrier",
    "VerificationReport",
    "build_super_supercritical",
]
