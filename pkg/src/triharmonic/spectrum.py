"""Characteristic roots of the linearisation around the singular solution.

The degree-six characteristic polynomial in ``l = m + lambda`` depends on
``l`` only through ``x = l (n - 6 - l)``, which collapses it to a cubic
``x^3 + b x^2 + c x - d``. For ``p >= p_JL`` its positive root ``x3`` lies in
``(m (n-6-m), (n-6)^2/4]`` and yields the real pair ``lambda_3 <= lambda_4``.
The two remaining cubic roots form a complex-conjugate pair throughout the
admissible range, so ``lambda_1, lambda_2, lambda_5, lambda_6`` come back as
complex numbers; nothing downstream uses them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exponents import Problem, jl_exponent, q_of_m

__all__ = [
    "Cubic",
    "Spectrum",
    "characteristic_value",
    "reduce_to_cubic",
    "solve_spectrum",
    "q_of_m",
    "DEGENERATE_P_RTOL",
]

# Relative distance to p_JL below which the spectrum is treated as critical.
DEGENERATE_P_RTOL = 1e-10
# Fallback flag on the computed gap lambda_4 - lambda_3.
_DEGENERATE_GAP = 1e-7


def _as_problem(n, p=None) -> Problem:
    if isinstance(n, Problem):
        return n
    return Problem(int(n), float(p))


def characteristic_value(n, p, lam):
    """Evaluate the characteristic polynomial P(lambda).

    Accepts scalars or arrays for ``lam``.
    """
    prob = _as_problem(n, p)
    n = prob.n
    lam = np.asarray(lam)
    l = prob.m + (lam if np.iscomplexobj(lam) else lam.astype(float))
    val = l * (l + 2) * (l + 4) * (n - 2 - l) * (n - 4 - l) * (n - 6 - l) - prob.d
    if np.ndim(val) == 0:
        return complex(val) if np.iscomplexobj(val) else float(val)
    return val


@dataclass(frozen=True)
class Cubic:
    """``x^3 + b x^2 + c x - d``."""

    b: float
    c: float
    d: float

    def __call__(self, x):
        return ((x + self.b) * x + self.c) * x - self.d

    def derivative(self, x):
        return (3 * x + 2 * self.b) * x + self.c

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([1.0, self.b, self.c, -self.d])

    def discriminant(self) -> float:
        b, c, d = self.b, self.c, -self.d
        return 18 * b * c * d - 4 * b**3 * d + b**2 * c**2 - 4 * c**3 - 27 * d**2


def reduce_to_cubic(n, p=None) -> Cubic:
    prob = _as_problem(n, p)
    n = prob.n
    return Cubic(b=6.0 * n - 16.0, c=8.0 * (n - 2) * (n - 4), d=prob.d)


def _newton_polish(cub: Cubic, x: float) -> float:
    dp = cub.derivative(x)
    return x - cub(x) / dp if dp != 0 else x


def _cubic_roots(cub: Cubic) -> tuple[np.ndarray, bool]:
    """Roots of the cubic as ``(x1, x2, x3)`` with ``x3`` the positive real root.

    The trigonometric method is used when all three roots are real; otherwise
    the single real root comes from Cardano's formula and the conjugate pair
    from deflation. Returns the roots and whether all three are real.
    """
    shift = cub.b / 3.0
    pp = cub.c - cub.b**2 / 3.0
    qq = 2.0 * cub.b**3 / 27.0 - cub.b * cub.c / 3.0 - cub.d
    disc = (qq / 2.0) ** 2 + (pp / 3.0) ** 3
    if disc <= 0 and pp < 0:
        amp = 2.0 * math.sqrt(-pp / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * qq / (pp * amp)))
        theta = math.acos(arg) / 3.0
        ys = [amp * math.cos(theta - 2.0 * math.pi * j / 3.0) for j in range(3)]
        xs = np.sort(np.array(ys) - shift)
        xs = np.array([_newton_polish(cub, x) for x in xs])
        return xs.astype(complex), True
    sq = math.sqrt(disc)
    # pick the sign that avoids cancellation
    big = -qq / 2.0 - math.copysign(sq, qq)
    u = math.copysign(abs(big) ** (1.0 / 3.0), big)
    x3 = u - pp / (3.0 * u) - shift
    x3 = _newton_polish(cub, _newton_polish(cub, x3))
    beta = cub.b + x3
    gamma = cub.d / x3
    re = -beta / 2.0
    im = math.sqrt(max(gamma - re * re, 0.0))
    return np.array([complex(re, -im), complex(re, im), complex(x3, 0.0)]), False


def _gap_to_vertex(prob: Problem, cub: Cubic, x3: float) -> float:
    """``y = (n-6)^2/4 - x3`` computed from the exact constant ``-Q(m)``.

    Expanding the cubic about the vertex ``X0`` keeps ``y`` accurate when
    ``x3`` is close to ``X0``, which is where the square root in the
    ``l``-formula amplifies errors.
    """
    n = prob.n
    X0 = (n - 6) ** 2 / 4.0
    c0 = -q_of_m(n, prob.m)              # P1(X0)
    c1 = cub.derivative(X0)              # P1'(X0)
    c2 = 3 * X0 + cub.b                  # P1''(X0) / 2
    y = X0 - x3
    for _ in range(4):
        f = c0 - c1 * y + c2 * y * y - y**3
        fp = -c1 + 2 * c2 * y - 3 * y * y
        step = f / fp
        y -= step
        if abs(step) <= 1e-16 * max(abs(y), 1e-300):
            break
    return y


def _complex_branches(n: int, x: complex) -> tuple[complex, complex]:
    s = np.sqrt(complex((n - 6) ** 2 - 4 * x))
    return ((n - 6) - s) / 2, ((n - 6) + s) / 2


@dataclass(frozen=True)
class Spectrum:
    """Characteristic roots and the derived exponents ``l`` and ``k0``.

    ``x`` and ``lam`` hold complex numbers; ``x[2]``, ``lam[2]`` and ``lam[3]``
    are always real. ``real_ladder`` reports whether all six roots are real.
    """

    n: int
    p: float
    m: float
    x: tuple
    lam: tuple
    l: float
    k0: float
    degenerate: bool
    real_ladder: bool

    @property
    def lambda3(self) -> float:
        return self.lam[2].real

    @property
    def lambda4(self) -> float:
        return self.lam[3].real

    @property
    def x3(self) -> float:
        return self.x[2].real

    def ordering_holds(self) -> bool:
        """The strict real ladder ``l1 < l2 < 0 < l3 <= l4 < l5 < l6``."""
        if not self.real_ladder:
            return False
        v = [z.real for z in self.lam]
        return v[0] < v[1] < 0 < v[2] <= v[3] < v[4] < v[5]

    def to_dict(self) -> dict:
        def cx(z):
            return [z.real, z.imag]
        return {
            "n": self.n, "p": self.p, "m": self.m,
            "x": [cx(z) for z in self.x], "lambda": [cx(z) for z in self.lam],
            "lambda3": self.lambda3, "lambda4": self.lambda4,
            "l": self.l, "k0": self.k0, "degenerate": self.degenerate,
            "real_ladder": self.real_ladder,
        }


def solve_spectrum(n, p=None) -> Spectrum:
    """Solve the characteristic equation for ``p >= p_JL(6, n)``.

    Parameters
    ----------
    n : int or Problem
        Dimension, or a full :class:`Problem` (then ``p`` is ignored).
    p : float
        Exponent; values within relative 1e-10 below ``p_JL`` are accepted
        and treated as critical, with ``x3`` set to ``(n-6)^2/4`` exactly.

    Returns
    -------
    Spectrum
    """
    prob = _as_problem(n, p)
    n, p, m = prob.n, prob.p, prob.m
    if n < 15:
        raise ValueError(f"real spectrum needs n >= 15, got n={n}")
    pjl = jl_exponent(6, n)
    if p < pjl * (1 - DEGENERATE_P_RTOL):
        raise ValueError(f"p={p!r} below p_JL={pjl!r}: lambda_3, lambda_4 are complex")
    snapped = abs(p / pjl - 1) <= DEGENERATE_P_RTOL

    cub = reduce_to_cubic(prob)
    xs, all_real = _cubic_roots(cub)
    x3 = xs[2].real
    if not x3 > m * (n - 6 - m):
        raise ArithmeticError(f"positive cubic root {x3} not above m(n-6-m)")

    half = (n - 6) / 2.0
    y = 0.0 if snapped else max(_gap_to_vertex(prob, cub, x3), 0.0)
    xs[2] = complex(half * half - y, 0.0)

    l1m, l1p = _complex_branches(n, xs[0])
    l2m, l2p = _complex_branches(n, xs[1])
    sy = math.sqrt(y)
    lam = tuple(complex(v) - m for v in
                (l1m, l2m, complex(half - sy), complex(half + sy), l2p, l1p))
    l = m + lam[2].real
    k0 = min(m + lam[3].real, 2 * l - m)
    gap = lam[3].real - lam[2].real
    degenerate = snapped or gap <= _DEGENERATE_GAP * (1 + abs(lam[3].real))
    return Spectrum(n=n, p=p, m=m, x=tuple(complex(v) for v in xs), lam=lam,
                    l=float(l), k0=float(k0), degenerate=bool(degenerate),
                    real_ladder=bool(all_real))
