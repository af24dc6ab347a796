"""Barriers for ``p > p_JL``."""

from __future__ import annotations

from typing import Optional

from ..exponents import Problem
from ..radial import PowerLogSum, binomial_cp
from ..spectrum import Spectrum, characteristic_value
from .core import (BarrierConstructionError, BarrierTriple, Piecewise,
                   inner_super_pieces, minus_laplacian_chain)
from .junctions import EPS_LADDER, eps_junctions, ordering_holds, sandwich_ok

C_PAD = 1.1


def _require_supercritical(spec: Spectrum) -> None:
    if spec.degenerate:
        raise ValueError("degenerate spectrum (p = p_JL): use the critical builders")


def sub_radii(prob: Problem, spec: Spectrum) -> tuple[float, float, float]:
    n, m, L, b, l = prob.n, prob.m, prob.L, prob.b, spec.l
    e = 1.0 / (l - m)
    r1 = (b / L) ** e
    r2 = (l * (n - 2 - l) * b / (m * (n - 2 - m) * L)) ** e
    r3 = (l * (l + 2) * (n - 2 - l) * (n - 4 - l) * b
          / (m * (m + 2) * (n - 2 - m) * (n - 4 - m) * L)) ** e
    return r1, r2, r3


def build_sub_supercritical(prob: Problem, spec: Spectrum) -> BarrierTriple:
    """Zero near the origin, ``L r^-m - b r^-l`` (and its Laplacians) outside."""
    _require_supercritical(spec)
    n = prob.n
    u_out = PowerLogSum.power(prob.L, prob.m) - PowerLogSum.power(prob.b, spec.l)
    outs = minus_laplacian_chain(u_out, n)
    radii = sub_radii(prob, spec)
    comps = tuple(Piecewise(r, o, None, n) for r, o in zip(radii, outs))
    return BarrierTriple("sub", "supercritical", prob, comps,
                         params={"b": prob.b, "l": spec.l},
                         radii={"r1": radii[0], "r2": radii[1], "r3": radii[2]})


def c_lower_bounds(prob: Problem, spec: Spectrum, k: float, cp: Optional[float] = None) -> dict:
    """The two lower bounds on ``c`` that make the outer super piece work."""
    m, L, b, l, p = prob.m, prob.L, prob.b, spec.l, prob.p
    if cp is None:
        cp = binomial_cp(p)
    Pk = characteristic_value(prob, None, k - m)
    if not Pk > 0:
        raise ValueError(f"P(k) = {Pk} must be positive for k in (l, k0)")
    e = (k + m - 2 * l) / (k - l)
    quad = (cp * L ** (p - 2) * b ** (2 - e) / Pk) ** (1 / (1 - e))
    order = b * (b / L) ** ((k - l) / (l - m))
    return {"quadratic_remainder": quad, "outer_radius_order": order, "P_k": Pk, "C_p": cp}


def super_limit_radii(prob: Problem, spec: Spectrum, k: float, c: float):
    n, b, l = prob.n, prob.b, spec.l
    e = 1.0 / (k - l)
    r1 = (c / b) ** e
    r2 = (k * (n - 2 - k) * c / (l * (n - 2 - l) * b)) ** e
    r3 = (k * (k + 2) * (n - 2 - k) * (n - 4 - k) * c
          / (l * (l + 2) * (n - 2 - l) * (n - 4 - l) * b)) ** e
    return r1, r2, r3


def build_super_supercritical(prob: Problem, spec: Spectrum, eps: Optional[float] = None,
                              k: Optional[float] = None, c: Optional[float] = None,
                              sub: Optional[BarrierTriple] = None) -> BarrierTriple:
    """Regularised singular solution inside, ``L r^-m - b r^-l + c r^-k`` outside.

    Parameters
    ----------
    prob, spec : Problem, Spectrum
    eps : float, optional
        Regularisation. ``None`` walks the ladder 1e-1, ..., 1e-8 and keeps the
        first value for which the junction ordering (and, if ``sub`` is given,
        the sandwich ``sub <= super``) holds.
    k : float, optional
        Decay of the correction, in ``(l, k0)``; defaults to the midpoint.
    c : float, optional
        Correction amplitude; defaults to 1.1 times the largest lower bound.
    sub : BarrierTriple, optional
        Sub-solution the super-solution must dominate.
    """
    _require_supercritical(spec)
    n, m, L, b, l = prob.n, prob.m, prob.L, prob.b, spec.l
    if k is None:
        k = 0.5 * (l + spec.k0)
    if not l < k < spec.k0:
        raise ValueError(f"k={k} outside the admissible interval ({l}, {spec.k0})")
    bounds = c_lower_bounds(prob, spec, k)
    c_min = max(bounds["quadratic_remainder"], bounds["outer_radius_order"])
    if c is None:
        c = C_PAD * c_min
    elif c < c_min:
        raise ValueError(f"c={c} below the required lower bound {c_min}")

    u_out = (PowerLogSum.power(L, m) - PowerLogSum.power(b, l) + PowerLogSum.power(c, k))
    outs = minus_laplacian_chain(u_out, n)
    lim = super_limit_radii(prob, spec, k, c)
    hi = lim[2] + 1.0
    ladder = EPS_LADDER if eps is None else (float(eps),)
    tried = []
    for e in ladder:
        inners = inner_super_pieces(prob, e)
        radii = eps_junctions(inners, outs, lim[0] * 1e-3, hi)
        ok = radii is not None and ordering_holds(lim, radii)
        trip = None
        if ok:
            comps = tuple(Piecewise(r, o, inn, n) for r, o, inn in zip(radii, outs, inners))
            trip = BarrierTriple(
                "super", "supercritical", prob, comps,
                params={"b": b, "l": l, "k": k, "c": c, "eps": e, "C_p": bounds["C_p"],
                        "P_k": bounds["P_k"], "c_bounds": [bounds["quadratic_remainder"],
                                                           bounds["outer_radius_order"]],
                        "eps_tried": tried + [e]},
                radii={"r1_bar": lim[0], "r2_bar": lim[1], "r3_bar": lim[2],
                       "r1_eps": radii[0], "r2_eps": radii[1], "r3_eps": radii[2]})
            if sub is not None and not sandwich_ok(sub, trip):
                ok = False
        tried.append(e)
        if ok:
            return trip
    raise BarrierConstructionError(
        f"no eps in {ladder} gives the junction ordering for n={n}, p={prob.p}, b={b}")
