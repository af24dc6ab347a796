"""Pointwise and weak-form checks of the barrier inequalities.

For a triple ``(u, v, w)`` the three inequalities are

    -Delta u  vs  v,    -Delta v  vs  w,    -Delta w  vs  u^p,

with ``<=`` for sub-solutions and ``>=`` for super-solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..exponents import Problem
from .core import COMPONENTS, BarrierTriple

POINTWISE_RTOL = 1e-9
WEAK_TOL = 1e-9
JUNCTION_EXCLUSION = 1e-10
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass
class VerificationReport:
    """Outcome of :func:`verify_barrier`.

    ``pointwise`` holds, per inequality, the worst signed violation relative
    to the local scale (positive means violated) and where it occurs.
    ``weak`` lists the normalised weak-form margin of every test bump
    (negative means violated).
    """

    role: str
    regime: str
    pointwise: dict = field(default_factory=dict)
    weak: list = field(default_factory=list)
    nonnegative: bool = True
    min_value: float = 0.0
    ordering: dict = field(default_factory=dict)
    passed: bool = False
    rtol: float = POINTWISE_RTOL
    weak_tol: float = WEAK_TOL

    def failures(self) -> list[str]:
        out = []
        for name, rec in self.pointwise.items():
            if rec["violation"] > self.rtol:
                out.append(f"pointwise {name}: {rec['violation']:.3e} at r={rec['r']:.6g}")
        for rec in self.weak:
            if rec["margin"] < -self.weak_tol:
                out.append(f"weak {rec['inequality']} bump at {rec['center']:.6g}: {rec['margin']:.3e}")
        if not self.nonnegative:
            out.append(f"negative component value {self.min_value:.3e}")
        for name, ok in self.ordering.items():
            if not ok:
                out.append(f"ordering {name} fails")
        return out

    def to_dict(self) -> dict:
        return {"role": self.role, "regime": self.regime, "pointwise": self.pointwise,
                "weak": self.weak, "nonnegative": self.nonnegative,
                "min_value": self.min_value, "ordering": self.ordering,
                "passed": self.passed, "rtol": self.rtol, "weak_tol": self.weak_tol,
                "failures": self.failures()}


def default_grid(trip: BarrierTriple, num: int = 10_000) -> np.ndarray:
    """Log-spaced grid with dense sampling within 10% of every junction."""
    js = np.array([j for j in trip.junctions if j > 0])
    lo, hi = js.min() / 100, js.max() * 4
    dense = [np.linspace(0.9 * j, 1.1 * j, num // (2 * len(js))) for j in js]
    return np.unique(np.concatenate([np.geomspace(lo, hi, num // 2)] + dense))


def _sources(trip: BarrierTriple, vals: np.ndarray, p: float) -> np.ndarray:
    """Right-hand sides ``v, w, u^p`` of the three inequalities."""
    u, v, w = vals
    return np.stack([v, w, np.maximum(u, 0.0) ** p])


def _sign(trip: BarrierTriple) -> float:
    # positive = satisfied after multiplying the residual -Delta X - f by this sign
    return -1.0 if trip.role == "sub" else 1.0


def pointwise_residuals(trip: BarrierTriple, r: np.ndarray, p: float):
    """``(-Delta X_i - f_i, scale_i)`` on ``r`` for the active pieces."""
    vals = trip.values(r)
    lap = np.stack([c.minus_laplacian(r) for c in trip.components])
    src = _sources(trip, vals, p)
    return lap - src, np.abs(lap) + np.abs(src)


def _bump(r, center, delta):
    x = (r - center) / delta
    inside = np.abs(x) < 1
    q = np.where(inside, 1 - x * x, 0.0)
    psi = q**3
    dpsi = np.where(inside, -6 * x * q**2 / delta, 0.0)
    d2psi = np.where(inside, (-6 * q**2 + 24 * x * x * q) / delta**2, 0.0)
    return psi, dpsi, d2psi


def weak_margin(trip: BarrierTriple, index: int, center: float, delta: float, p: float) -> float:
    """Normalised ``s * int (-X Delta psi - f psi) r^(n-1) dr`` for one bump.

    ``s`` is +1 for super- and -1 for sub-solutions, so a negative margin
    signals a violated distributional inequality.
    """
    n = trip.problem.n
    a, b = max(center - delta, 0.0), center + delta
    cuts = sorted({a, b, *[j for j in trip.junctions if a < j < b]})
    total, absolute = 0.0, 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        r = 0.5 * (hi - lo) * _GAUSS_NODES + 0.5 * (hi + lo)
        wts = 0.5 * (hi - lo) * _GAUSS_WEIGHTS * r ** (n - 1)
        psi, dpsi, d2psi = _bump(r, center, delta)
        lap_psi = d2psi + (n - 1) / r * dpsi
        vals = trip.values(r)
        X = vals[index]
        f = _sources(trip, vals, p)[index]
        total += np.sum(wts * (-X * lap_psi - f * psi))
        absolute += np.sum(wts * (np.abs(X * lap_psi) + np.abs(f * psi)))
    if absolute == 0:
        return 0.0
    return float(_sign(trip) * total / absolute)


def bump_family(junction: float) -> list[tuple[float, float]]:
    """Five ``(center, half_width)`` pairs straddling or touching ``junction``."""
    d = junction / 10
    return [(junction, d), (junction - 0.5 * d, d), (junction + 0.5 * d, d),
            (junction, 0.05 * junction), (junction, 0.2 * junction)]


def ordering_checks(trip: BarrierTriple) -> dict:
    rd = trip.radii
    out = {}
    if trip.role == "sub":
        chain = ([rd["R"]] if trip.regime == "critical" else []) + [rd["r1"], rd["r2"], rd["r3"]]
        out["sub_radii"] = all(x < y for x, y in zip(chain, chain[1:]))
    else:
        chain = [rd["r1_bar"], rd["r1_eps"], rd["r2_bar"], rd["r2_eps"],
                 rd["r3_bar"], rd["r3_eps"], rd["r3_bar"] + 1]
        out["borderline_radii"] = all(x < y for x, y in zip(chain, chain[1:]))
    return out


def verify_barrier(trip: BarrierTriple, prob: Optional[Problem] = None,
                   grid: Optional[Sequence[float]] = None, rtol: float = POINTWISE_RTOL,
                   weak_tol: float = WEAK_TOL) -> VerificationReport:
    """Check every defining inequality of a barrier triple.

    Parameters
    ----------
    trip : BarrierTriple
    prob : Problem, optional
        Defaults to ``trip.problem``; must agree with it when given.
    grid : array-like, optional
        Radii for the pointwise checks; :func:`default_grid` when omitted.
    rtol, weak_tol : float
        Pointwise tolerance relative to ``|-Delta X| + |f|`` and the weak-form
        tolerance on the normalised margins.

    Returns
    -------
    VerificationReport
    """
    prob = trip.problem if prob is None else prob
    if prob != trip.problem:
        raise ValueError("problem does not match the barrier triple")
    p = prob.p
    r = np.asarray(default_grid(trip) if grid is None else grid, dtype=float)
    r = r[r > 0]
    js = np.array(trip.junctions)
    near = np.any(np.abs(r[:, None] - js[None, :]) <= JUNCTION_EXCLUSION * js[None, :], axis=1)
    rr = r[~near]

    rep = VerificationReport(role=trip.role, regime=trip.regime, rtol=rtol, weak_tol=weak_tol)
    res, scale = pointwise_residuals(trip, rr, p)
    sgn = _sign(trip)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, -sgn * res / scale, 0.0)
    names = ("-Delta u vs v", "-Delta v vs w", "-Delta w vs u^p")
    for i, name in enumerate(names):
        j = int(np.argmax(rel[i]))
        rep.pointwise[name] = {"violation": float(rel[i, j]), "r": float(rr[j])}

    vals = trip.values(r)
    rep.min_value = float(vals.min())
    rep.nonnegative = bool(rep.min_value >= -rtol * np.abs(vals).max())

    for i in range(3):
        for k, jn in enumerate(trip.junctions):
            for center, delta in bump_family(jn):
                rep.weak.append({"inequality": names[i], "junction": COMPONENTS[k],
                                 "center": center, "delta": delta,
                                 "margin": weak_margin(trip, i, center, delta, p)})

    rep.ordering = ordering_checks(trip)
    rep.passed = not rep.failures()
    return rep
