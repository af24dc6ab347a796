"""Sobolev / Joseph-Lundgren exponent ladder and singular-solution constants.

All exponents are returned as plain floats; ``math.inf`` marks the
dimensions where the Joseph-Lundgren exponent does not exist.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

ORDERS = (2, 4, 6)

# Oracle wins when the closed form drifts further than this.
_CLOSED_FORM_RTOL = 1e-8


def _check_order(k: int) -> None:
    if k not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {k}")


def sobolev_exponent(k: int, n: int) -> float:
    """Return ``(n + k) / (n - k)``."""
    _check_order(k)
    if n <= k:
        raise ValueError(f"Sobolev exponent of order {k} needs n > {k}, got n={n}")
    return (n + k) / (n - k)


@dataclass(frozen=True)
class K0K1:
    """Auxiliary constants of the order-6 closed form.

    ``two_k0`` and ``radicand`` are exact integers. ``k1`` is real when the
    radicand is non-negative and purely imaginary otherwise.
    """

    n: int
    two_k0: int
    radicand: int
    k0: float
    k1: complex | float

    @property
    def real_radicand(self) -> bool:
        return self.radicand >= 0


def k0k1(n: int) -> K0K1:
    if n < 15:
        raise ValueError(f"K0/K1 are only used for n >= 15, got n={n}")
    n = int(n)
    two_k0 = (-27 * n**6 + 324 * n**5 - 756 * n**4 - 2592 * n**3
              + 25776 * n**2 + 5184 * n - 23744)
    radicand = two_k0**2 - 4 * (192 * n**2 + 256) ** 3
    k0 = two_k0 / 2
    if radicand >= 0:
        k1: complex | float = math.sqrt(radicand) / 2
    else:
        k1 = 1j * math.sqrt(-radicand) / 2
    return K0K1(n=n, two_k0=two_k0, radicand=radicand, k0=k0, k1=k1)


def _cube_root_sum(kk: K0K1) -> float:
    """Real value of cbrt(K0 + K1) + cbrt(K0 - K1)."""
    n = kk.n
    if kk.real_radicand:
        # K0 + K1 and K0 - K1 multiply to (192 n^2 + 256)^3, so the small
        # one is recovered from the large one without cancellation.
        prod = float((192 * n**2 + 256) ** 3)
        big = kk.k0 - kk.k1 if kk.k0 < 0 else kk.k0 + kk.k1
        small = prod / big
        return float(math.copysign(abs(big) ** (1 / 3), big)
                     + math.copysign(abs(small) ** (1 / 3), small))
    plus = complex(kk.k0, 0) + kk.k1
    minus = complex(kk.k0, 0) - kk.k1
    total = plus ** (1 / 3) + minus ** (1 / 3)
    if abs(total.imag) > 1e-9 * max(1.0, abs(total)):
        raise ArithmeticError(f"cube-root sum not real for n={n}: {total}")
    return total.real


def q_of_m(n: int, m: float) -> float:
    """``Q(m)``: negative for p > p_JL, zero exactly at m = 6 / (p_JL - 1)."""
    return ((m + 6) * (m + 2) * (m + 4) * (n - 2 - m) * (n - 4 - m) * (n - 6 - m)
            - (n - 6) ** 2 * (n - 2) ** 2 * (n + 2) ** 2 / 64)


def _jl_closed_form(k: int, n: int) -> float:
    if k == 2:
        return ((n - 2) ** 2 - 4 * n + 8 * math.sqrt(n - 1)) / ((n - 2) * (n - 10))
    if k == 4:
        s = math.sqrt(n**2 + 4 - n * math.sqrt(n**2 - 8 * n + 32))
        return (n + 2 - s) / (n - 6 - s)
    inner = math.sqrt(_cube_root_sum(k0k1(n)) + 3 * n**2 + 32)
    r3 = math.sqrt(3.0)
    return ((n + 4) * r3 - inner) / ((n - 8) * r3 - inner)


def _jl_threshold(k: int) -> int:
    # smallest dimension with a finite exponent
    return {2: 11, 4: 13, 6: 15}[k]


def jl_exponent_ambiguous(k: int, n: int) -> bool:
    """True for the one dimension (order 4, n = 12) whose status is not stated."""
    return k == 4 and n == 12


def jl_exponent_oracle(k: int, n: int) -> float:
    """Joseph-Lundgren exponent by bracketed root finding.

    The exponent is the p at which the linearised characteristic equation
    acquires a double root. For each order this is a scalar equation in
    ``m_k = k / (p - 1)`` on ``(0, (n - k) / 2)``.
    """
    _check_order(k)
    if n < _jl_threshold(k):
        return math.inf
    half = (n - k) / 2
    if k == 2:
        def g(m):
            return (m + 2) * (n - 2 - m) - half**2
    elif k == 4:
        def g(m):
            return ((m + 4) * (m + 2) * (n - 2 - m) * (n - 4 - m)
                    - (n - 4) ** 2 * n**2 / 16)
    else:
        def g(m):
            return q_of_m(n, m)
    root = brentq(g, 0.0, half, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return 1.0 + k / root


def jl_exponent(k: int, n: int) -> float:
    """Joseph-Lundgren exponent p_JL(k, n); ``inf`` in low dimensions.

    The closed form is checked against :func:`jl_exponent_oracle`; the
    oracle value is returned if the two disagree beyond 1e-8 relative.
    """
    _check_order(k)
    minimum = {2: 3, 4: 5, 6: 7}[k]
    if n < minimum:
        raise ValueError(f"order-{k} exponent needs n >= {minimum}, got n={n}")
    if n < _jl_threshold(k):
        return math.inf
    closed = _jl_closed_form(k, n)
    oracle = jl_exponent_oracle(k, n)
    if not math.isfinite(closed) or abs(closed - oracle) > _CLOSED_FORM_RTOL * oracle:
        warnings.warn(f"closed-form p_JL({k},{n})={closed!r} disagrees with "
                      f"root oracle {oracle!r}; using the oracle", RuntimeWarning)
        return oracle
    return closed


def _factor_list(k: int, n: int, m: float) -> list[float]:
    if k == 2:
        return [m, n - 2 - m]
    if k == 4:
        return [m, m + 2, n - 2 - m, n - 4 - m]
    return [m, m + 2, m + 4, n - 2 - m, n - 4 - m, n - 6 - m]


def decay_constants(k: int, n: int, p: float) -> tuple[float, float]:
    """Return ``(m_k, L_k)`` of the singular solution ``L_k r^{-m_k}``."""
    _check_order(k)
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    m = k / (p - 1)
    factors = _factor_list(k, n, m)
    if min(factors) <= 0:
        raise ValueError(f"p={p} not above n/(n-{k}) for n={n}: "
                         f"non-positive factor in the L_{k} product")
    return m, math.prod(factors) ** (1.0 / (p - 1))


_P_SPEC = re.compile(r"^\s*(?:(?P<fac>[0-9.eE+-]+)\s*[x*]\s*)?jl\s*$")


def parse_exponent(text: str | float, n: int) -> float:
    """Interpret ``"jl"``, ``"1.5xjl"`` or a plain number as an exponent."""
    if not isinstance(text, str):
        return float(text)
    mt = _P_SPEC.match(text.lower())
    if mt is None:
        return float(text)
    fac = float(mt.group("fac")) if mt.group("fac") else 1.0
    return fac * jl_exponent(6, n)


@dataclass(frozen=True)
class Problem:
    """The triple ``(n, p, b)`` with the derived constants ``m`` and ``L``."""

    n: int
    p: float
    b: float = 1.0
    m: float = field(init=False)
    L: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 7:
            raise ValueError(f"dimension must be an integer >= 7, got {self.n}")
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b}")
        if not self.p > self.n / (self.n - 6):
            raise ValueError(f"p={self.p} must exceed n/(n-6)={self.n / (self.n - 6)}")
        m, L = decay_constants(6, self.n, self.p)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "L", L)

    @classmethod
    def parse(cls, n: int, p: str | float, b: float = 1.0) -> "Problem":
        return cls(int(n), parse_exponent(p, int(n)), float(b))

    @property
    def p_jl(self) -> float:
        return jl_exponent(6, self.n)

    @property
    def d(self) -> float:
        """``p L^{p-1}``, the constant term of the characteristic equation."""
        return self.p * self.L ** (self.p - 1)

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "b": self.b, "m": self.m, "L": self.L}
