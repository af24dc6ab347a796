"""Barriers for ``p = p_JL``, where the second term picks up a logarithm."""

from __future__ import annotations

import math
from typing import Optional

from scipy.optimize import brentq

from ..exponents import Problem
from ..radial import PowerLogSum, binomial_cp
from ..spectrum import Spectrum
from .core import (BarrierConstructionError, BarrierTriple, Piecewise,
                   inner_super_pieces, minus_laplacian_chain)
from .junctions import EPS_LADDER, eps_junctions, limit_radii, ordering_holds, sandwich_ok

MU_PAD = 1.1
C_PAD = 1.1
BETA_DEFAULT = 0.5


def _require_critical(spec: Spectrum) -> None:
    if not spec.degenerate:
        raise ValueError("critical builders need the degenerate spectrum p = p_JL")


def mu_lower_bounds(prob: Problem, l: float) -> list[float]:
    n, m = prob.n, prob.m
    return [
        1.0 / (l - m),
        (n - 2 - 2 * l) / ((n - 2 - l - m) * (l - m)),
        l * (n - 2 - l) / (m * (n - 2 - m) * (l - m)),
        (n - 2 - 2 * l) / (l * (n - 2 - l)),
        l * (l + 2) * (n - 2 - l) * (n - 4 - l)
        / (m * (m + 2) * (n - 2 - m) * (n - 4 - m) * (l - m)),
    ]


def _first_root_after(fun, lo: float) -> float:
    """Bracket a sign change of ``fun`` (negative at ``lo``) by doubling, then solve."""
    if not fun(lo) < 0:
        raise BarrierConstructionError(f"expected a negative value at r={lo}")
    hi = 2 * lo
    for _ in range(200):
        if fun(hi) > 0:
            return float(brentq(fun, lo, hi, xtol=1e-15 * hi, rtol=1e-15, maxiter=200))
        lo, hi = hi, 2 * hi
    raise BarrierConstructionError("no sign change found")


def build_sub_critical(prob: Problem, spec: Spectrum, mu: Optional[float] = None) -> BarrierTriple:
    """Zero near the origin, ``L r^-m - b r^-l log(r/R)`` outside.

    ``v`` and ``w`` outer pieces are the exact ``-Delta`` and ``Delta^2`` of the
    ``u`` piece.
    """
    _require_critical(spec)
    n, m, L, b = prob.n, prob.m, prob.L, prob.b
    l = spec.l
    bounds = mu_lower_bounds(prob, l)
    if mu is None:
        mu = MU_PAD * max(bounds)
    elif not mu > max(bounds):
        raise ValueError(f"mu={mu} must exceed {max(bounds)}")
    r1 = (mu * b / L) ** (1.0 / (l - m))
    R = math.exp(-mu) * r1
    u_out = PowerLogSum.power(L, m) - PowerLogSum.power(b, l, 1.0, R)
    outs = minus_laplacian_chain(u_out, n)
    r2 = _first_root_after(outs[1], r1)
    r3 = _first_root_after(outs[2], r2)
    if not R < r1 < r2 < r3:
        raise BarrierConstructionError(f"ordering R<r1<r2<r3 fails: {R}, {r1}, {r2}, {r3}")
    comps = tuple(Piecewise(r, o, None, n) for r, o in zip((r1, r2, r3), outs))
    return BarrierTriple("sub", "critical", prob, comps,
                         params={"b": b, "l": l, "mu": mu, "R": R, "mu_bounds": bounds},
                         radii={"R": R, "r1": r1, "r2": r2, "r3": r3})


def critical_coefficients(prob: Problem, l: float, beta: float) -> dict:
    """Coefficients ``A0..A2`` and ``B0..B6`` of the expanded outer ``-Delta w``.

    Evaluated from the general-``l`` expressions, so the vanishing of ``A2``,
    ``B1``, ``B3`` and ``B5`` at ``l = (n-6)/2`` is a genuine check.
    """
    n, m = prob.n, prob.m
    bt = beta
    s1, s2 = l * (n - 2 - l), (l + 2) * (n - 4 - l)
    s3 = (l + 4) * (n - 6 - l)
    d2, d10 = n - 2 - 2 * l, n - 10 - 2 * l
    A0 = m * (m + 2) * (m + 4) * (n - 2 - m) * (n - 4 - m) * (n - 6 - m)
    A1 = s1 * s2 * s3
    A2 = s2 * (s1 * d10 + s3 * d2)
    g1 = bt * (1 - bt)
    g2 = g1 * (2 - bt)
    g3 = g2 * (3 - bt)
    g4 = g3 * (4 - bt)
    return {
        "A0": A0, "A1": A1, "A2": A2,
        "B0": A1,
        "B1": bt * A2,
        "B2": g1 * (s1 * s2 - s2 * d2 * d10 + s3 * (s1 + s2)),
        "B3": g2 * (d2 * s2 + d10 * (s1 + s2) + d2 * s3),
        "B4": g3 * (s2 + s1 - d2 * d10 + s3),
        "B5": g4 * (-d2 - d10),
        "B6": g4 * (5 - bt),
    }


def quartic_poly(n: int) -> float:
    return 3 * n**4 - 24 * n**3 + 72 * n**2 - 96 * n + 304


def t_constraints(prob: Problem, l: float, beta: float, R: float, r3_sub: float,
                  cp: float) -> dict:
    """Lower bounds on ``t = (c/b)^(1/(1-beta)) = log(r1_bar / R)``.

    Every condition on ``c`` is monotone in ``t`` once ``t`` exceeds the
    closed-form bounds, so each is turned into the threshold value of ``t``.
    """
    n, m, L, b, p = prob.n, prob.m, prob.L, prob.b, prob.p
    bt = beta
    S4 = quartic_poly(n)
    s1, s2 = l * (n - 2 - l), (l + 2) * (n - 4 - l)
    d2 = n - 2 - 2 * l
    lm = l - m

    def X(t):
        # r1_bar^(l-m), with r1_bar = R e^t
        return R ** lm * math.exp(lm * t)

    closed = {
        "slope_of_g": (4 - bt) / lm,
        "B4_vs_half_B2": math.sqrt(24 * (2 - bt) * (3 - bt) * (3 * n**2 - 12 * n + 44) / S4),
        "phi2_slope": bt * d2 / s1,
        "phi3_root_sign": math.sqrt((2 - bt) * (3 - bt) / s1),
        "sub_r3_below_super_r1": math.log(r3_sub / R),
    }
    base = max(closed.values())
    quad = 32 * cp * L ** (p - 2) * b**2 / (bt * (1 - bt) * S4)
    implicit = {
        "f_increasing": lambda t: lm * L * X(t) - b,
        "u_below_singular": lambda t: L * X(t) - b * t,
        "quadratic_remainder": lambda t: b * X(t) * t**-3 - quad,
        "phi3_slope": lambda t: s1 * s2 - bt * (s1 + s2) / t**2 - bt * (2 - bt) * d2 / t**3,
        "w_gap_sign": lambda t: s1 * s2 * t**4 - bt * d2 * s2 * t**3 - bt * (1 - bt) * (2 - bt) * (3 - bt),
    }
    out = dict(closed)
    for name, g in implicit.items():
        if g(base) > 0:
            out[name] = 0.0
            continue
        hi = 2 * base
        while g(hi) <= 0:
            hi *= 2
        out[name] = float(brentq(g, base, hi, xtol=1e-14 * hi))
    return out


def build_super_critical(prob: Problem, spec: Spectrum, eps: Optional[float] = None,
                         beta: float = BETA_DEFAULT, c: Optional[float] = None,
                         sub: Optional[BarrierTriple] = None) -> BarrierTriple:
    """Regularised singular solution inside; outside

    ``L r^-m - b r^-l log(r/R) + c r^-l log(r/R)^beta``

    with ``R`` taken from the critical sub-solution (built here when ``sub``
    is not supplied). ``eps=None`` walks the same ladder as the supercritical
    builder.
    """
    _require_critical(spec)
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    n, m, L, b, l = prob.n, prob.m, prob.L, prob.b, spec.l
    if sub is None:
        sub = build_sub_critical(prob, spec)
    R = sub.params["R"]
    cp = binomial_cp(prob.p)
    tb = t_constraints(prob, l, beta, R, sub.radii["r3"], cp)
    t_min = max(tb.values())
    c_min = b * t_min ** (1 - beta)
    if c is None:
        c = C_PAD * c_min
    elif not c > c_min:
        raise ValueError(f"c={c} must exceed the lower bound {c_min}")
    t = (c / b) ** (1 / (1 - beta))

    u_out = (PowerLogSum.power(L, m) - PowerLogSum.power(b, l, 1.0, R)
             + PowerLogSum.power(c, l, beta, R))
    outs = minus_laplacian_chain(u_out, n)
    r1_bar = R * math.exp(t)
    inners0 = inner_super_pieces(prob, 0.0)
    rest = limit_radii(inners0[1:], outs[1:], r1_bar, r1_bar * 10)
    if rest is None:
        raise BarrierConstructionError("limiting gap functions lack a unique root")
    lim = [r1_bar] + rest
    hi = lim[2] + 1.0
    ladder = EPS_LADDER if eps is None else (float(eps),)
    tried = []
    params = {"b": b, "l": l, "beta": beta, "c": c, "t": t, "R": R, "C_p": cp,
              "c_min": c_min, "t_bounds": tb}
    for e in ladder:
        inners = inner_super_pieces(prob, e)
        radii = eps_junctions(inners, outs, R * (1 + 1e-9), hi)
        tried.append(e)
        if radii is None or not ordering_holds(lim, radii):
            continue
        comps = tuple(Piecewise(r, o, inn, n) for r, o, inn in zip(radii, outs, inners))
        trip = BarrierTriple(
            "super", "critical", prob, comps,
            params={**params, "eps": e, "eps_tried": list(tried)},
            radii={"R": R, "r1_bar": lim[0], "r2_bar": lim[1], "r3_bar": lim[2],
                   "r1_eps": radii[0], "r2_eps": radii[1], "r3_eps": radii[2]})
        if sandwich_ok(sub, trip):
            return trip
    raise BarrierConstructionError(
        f"no eps in {ladder} gives the junction ordering for n={n}, p=p_JL, b={b}")
