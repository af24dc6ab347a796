"""Inner/outer junction search shared by the super-solution builders."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from ..radial import PowerLogSum
from .core import BarrierTriple, InnerPower, scan_sign_changes

EPS_LADDER = tuple(10.0 ** -k for k in range(1, 9))
SCAN_INTERVALS = 1000


def gap_root(inner: InnerPower, outer: PowerLogSum, lo: float, hi: float,
             limit: bool = False) -> Optional[float]:
    """Unique sign change of ``inner - outer`` on ``[lo, hi]`` (negative to positive).

    ``limit=True`` uses the ``eps -> 0`` inner function. Returns ``None`` when
    the scan does not find exactly one sign change.
    """
    val = inner.limit_value if limit else inner.value

    def gap(r):
        return val(r) - outer(r)

    brackets = scan_sign_changes(gap, lo, hi, SCAN_INTERVALS)
    if len(brackets) != 1:
        return None
    a, b = brackets[0]
    if a == b:
        return a
    if not gap(a) < 0:
        return None
    return float(brentq(gap, a, b, xtol=1e-15 * b, rtol=1e-15, maxiter=200))


def limit_radii(inners: Sequence[InnerPower], outers: Sequence[PowerLogSum],
                start: float, hi: float) -> Optional[list[float]]:
    """Roots of the limiting gap functions, each searched past the previous one."""
    radii = []
    lo = start
    for inner, outer in zip(inners, outers):
        root = gap_root(inner, outer, lo, hi, limit=True)
        if root is None:
            return None
        radii.append(root)
        lo = root
    return radii


def eps_junctions(inners: Sequence[InnerPower], outers: Sequence[PowerLogSum],
                  start: float, hi: float) -> Optional[list[float]]:
    """Junction radii ``r_i(eps)``; each gap function is scanned from the previous junction."""
    radii = []
    lo = start
    for inner, outer in zip(inners, outers):
        root = gap_root(inner, outer, lo, hi)
        if root is None:
            return None
        radii.append(root)
        lo = root
    return radii


def ordering_holds(limit: Sequence[float], eps_radii: Sequence[float]) -> bool:
    """``r1 < r1(e) < r2 < r2(e) < r3 < r3(e) < r3 + 1``."""
    chain = [limit[0], eps_radii[0], limit[1], eps_radii[1], limit[2], eps_radii[2], limit[2] + 1]
    return all(a < b for a, b in zip(chain, chain[1:]))


def sandwich_ok(sub: BarrierTriple, sup: BarrierTriple, slack: float = 1e-9) -> bool:
    """``sub <= super`` componentwise on a grid covering every junction."""
    js = [j for j in sub.junctions + sup.junctions if j > 0]
    lo, hi = min(js) / 100, max(js) * 20
    r = np.unique(np.concatenate([np.geomspace(lo, hi, 4000)]
                                 + [np.linspace(0.9 * j, 1.1 * j, 201) for j in js]))
    a, b = sub.values(r), sup.values(r)
    return bool(np.all(a <= b + slack * np.maximum(np.abs(a), np.abs(b))))
