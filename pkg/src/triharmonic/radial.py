"""Exact radial calculus on sums of terms ``a r^{-alpha} (log(r/R))^gamma``.

Radial functions built from such terms are closed under the radial
Laplacian, so every barrier piece can be differentiated without
discretisation error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import minimize_scalar

MERGE_ATOL = 1e-12


@dataclass(frozen=True)
class PowerLogTerm:
    """A single term ``a * r**(-alpha) * log(r / R)**gamma``.

    ``gamma`` may be any real number; for non-integer ``gamma`` the term is
    only defined for ``r > R``. Terms with ``gamma == 0`` ignore ``R``.
    """

    a: float
    alpha: float
    gamma: float = 0.0
    R: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"log base R must be positive, got {self.R}")
        if self.gamma == 0 and self.R != 1.0:
            object.__setattr__(self, "R", 1.0)

    def key(self) -> tuple:
        return (self.alpha, self.gamma, self.R)

    def values(self, r: np.ndarray) -> np.ndarray:
        out = self.a * r ** (-self.alpha)
        if self.gamma != 0:
            lg = np.log(r / self.R)
            if float(self.gamma).is_integer():
                out = out * lg ** int(self.gamma)
            else:
                with np.errstate(invalid="ignore"):
                    out = out * np.power(lg, self.gamma)
        return out

    def laplacian(self, n: int) -> list["PowerLogTerm"]:
        a, al, g, R = self.a, self.alpha, self.gamma, self.R
        out = [PowerLogTerm(-a * al * (n - 2 - al), al + 2, g, R)]
        if g != 0:
            out.append(PowerLogTerm(a * g * (n - 2 - 2 * al), al + 2, g - 1, R))
            if g != 1:
                out.append(PowerLogTerm(a * g * (g - 1), al + 2, g - 2, R))
        return out

    def to_dict(self) -> dict:
        return {"a": self.a, "alpha": self.alpha, "gamma": self.gamma, "R": self.R}


def _canonical(terms: Iterable[PowerLogTerm]) -> tuple[PowerLogTerm, ...]:
    merged: list[PowerLogTerm] = []
    for t in sorted(terms, key=lambda t: (t.alpha, t.gamma, t.R)):
        if merged:
            last = merged[-1]
            if (abs(last.alpha - t.alpha) <= MERGE_ATOL
                    and abs(last.gamma - t.gamma) <= MERGE_ATOL and last.R == t.R):
                merged[-1] = PowerLogTerm(last.a + t.a, last.alpha, last.gamma, last.R)
                continue
        merged.append(t)
    return tuple(t for t in merged if t.a != 0.0)


class PowerLogSum:
    """Immutable canonical sum of :class:`PowerLogTerm` objects."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[PowerLogTerm] = ()):
        object.__setattr__(self, "terms", _canonical(terms))

    def __setattr__(self, *_):
        raise AttributeError("PowerLogSum is immutable")

    @classmethod
    def power(cls, a: float, alpha: float, gamma: float = 0.0, R: float = 1.0):
        return cls([PowerLogTerm(float(a), float(alpha), float(gamma), float(R))])

    @classmethod
    def from_dicts(cls, items: Iterable[dict]) -> "PowerLogSum":
        return cls(PowerLogTerm(float(d["a"]), float(d["alpha"]),
                                float(d.get("gamma", 0.0)), float(d.get("R", 1.0)))
                   for d in items)

    def to_dicts(self) -> list[dict]:
        return [t.to_dict() for t in self.terms]

    def __add__(self, other: "PowerLogSum") -> "PowerLogSum":
        return PowerLogSum(self.terms + other.terms)

    def __sub__(self, other: "PowerLogSum") -> "PowerLogSum":
        return self + (-1.0) * other

    def __rmul__(self, s: float) -> "PowerLogSum":
        return PowerLogSum(PowerLogTerm(s * t.a, t.alpha, t.gamma, t.R) for t in self.terms)

    __mul__ = __rmul__

    def __neg__(self) -> "PowerLogSum":
        return (-1.0) * self

    def __eq__(self, other) -> bool:
        return isinstance(other, PowerLogSum) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        parts = [f"{t.a:+.6g} r^-{t.alpha:.6g}" + (f" log(r/{t.R:.6g})^{t.gamma:g}" if t.gamma else "")
                 for t in self.terms]
        return "PowerLogSum(" + " ".join(parts) + ")"

    def laplacian(self, n: int) -> "PowerLogSum":
        return radial_laplacian(self, n)

    def __call__(self, r):
        return evaluate(self, r)


def radial_laplacian(f: PowerLogSum, n: int) -> PowerLogSum:
    """Exact radial Laplacian in dimension ``n``."""
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    out: list[PowerLogTerm] = []
    for t in f.terms:
        out.extend(t.laplacian(n))
    return PowerLogSum(out)


def evaluate(f: PowerLogSum, r):
    """Evaluate ``f`` at ``r > 0``, summing contributions in order of magnitude."""
    rr = np.asarray(r, dtype=float)
    if np.any(rr <= 0):
        raise ValueError("radial functions are evaluated at r > 0 only")
    if not f.terms:
        out = np.zeros_like(rr)
    else:
        vals = np.stack([t.values(rr) for t in f.terms])
        order = np.argsort(np.abs(vals), axis=0)
        out = np.take_along_axis(vals, order, axis=0).sum(axis=0)
    return float(out) if out.ndim == 0 else out


def minus_laplacian_cubed(f: PowerLogSum, n: int) -> PowerLogSum:
    """``(-Delta)^3 f``."""
    return -radial_laplacian(radial_laplacian(radial_laplacian(f, n), n), n)


def triharmonic_residual(f: PowerLogSum, n: int, p: float, r):
    """``(-Delta)^3 f - f^p`` at ``r``; ``f`` must be positive there."""
    u = np.asarray(evaluate(f, r))
    if np.any(u <= 0):
        raise ValueError("triharmonic residual needs f > 0")
    out = np.asarray(evaluate(minus_laplacian_cubed(f, n), r)) - u**p
    return float(out) if out.ndim == 0 else out


# --- binomial remainder constant -------------------------------------------

def _binomial_ratio(p: float, z):
    """``((1-z)^p - 1 + p z) / z^2`` for z in [0, 1], stable near z = 0."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    small = z < 0.05
    one = z == 1.0
    mid = ~small & ~one
    zm = z[mid]
    out[mid] = (np.expm1(p * np.log1p(-zm)) + p * zm) / zm**2
    out[one] = p - 1.0
    # series: sum_{k>=2} C(p,k) (-z)^(k-2)
    zs = z[small]
    acc = np.zeros_like(zs)
    coef = p * (p - 1) / 2.0
    powz = np.ones_like(zs)
    for k in range(2, 40):
        acc += coef * powz
        coef *= -(p - k) / (k + 1)
        powz *= zs
    out[small] = acc
    return out


def binomial_cp(p: float, pad: float = 1.01) -> float:
    """Constant ``C_p`` with ``(1-z)^p <= 1 - p z + C_p z^2`` on [0, 1].

    Parameters
    ----------
    p : float
        Exponent, ``p > 1``.
    pad : float
        Multiplicative safety factor applied to the numerical supremum.

    Returns
    -------
    float
        ``pad`` times the supremum over ``z`` of the remainder ratio.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    grid = np.concatenate([[0.0], np.geomspace(1e-6, 1.0, 4000)])
    vals = _binomial_ratio(p, grid)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda z: -_binomial_ratio(p, z)[0], bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    if p >= 2:
        bound = p * (p - 1) / 2
        assert best <= bound * (1 + 1e-12), (p, best, bound)
        # the ratio is decreasing for p >= 2, so its sup is the z -> 0 limit;
        # drop rounding noise above that limit
        best = min(best, bound)
    return pad * best
