"""Piecewise radial components, barrier triples and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exponents import Problem
from ..radial import PowerLogSum, radial_laplacian

SCHEMA_VERSION = 1


class BarrierConstructionError(RuntimeError):
    """A builder could not satisfy the ordering or constant constraints."""


@dataclass(frozen=True)
class InnerPower:
    """``A (r^2 + eps)^(-alpha/2)``, the regularised inner super piece."""

    A: float
    alpha: float
    eps: float

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.A * (r * r + self.eps) ** (-self.alpha / 2)

    def minus_laplacian(self, r, n: int):
        # -Delta s^(-a/2) = a(n-2-a) s^(-(a+2)/2) + a(a+2) eps s^(-(a+4)/2), s = r^2+eps
        r = np.asarray(r, dtype=float)
        a = self.alpha
        s = r * r + self.eps
        return self.A * (a * (n - 2 - a) * s ** (-(a + 2) / 2)
                         + a * (a + 2) * self.eps * s ** (-(a + 4) / 2))

    def limit_value(self, r):
        """The ``eps -> 0`` limit ``A r^(-alpha)``."""
        return self.A * np.asarray(r, dtype=float) ** (-self.alpha)

    def with_eps(self, eps: float) -> "InnerPower":
        return InnerPower(self.A, self.alpha, eps)

    def to_dict(self) -> dict:
        return {"kind": "eps_power", "A": self.A, "alpha": self.alpha, "eps": self.eps}


@dataclass(frozen=True)
class Piecewise:
    """Radial function equal to ``inner`` on ``r < junction`` and ``outer`` beyond.

    ``inner=None`` means the zero function.
    """

    junction: float
    outer: PowerLogSum
    inner: Optional[InnerPower] = None
    n: int = 0
    _minus_lap_outer: PowerLogSum = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_minus_lap_outer",
                           -radial_laplacian(self.outer, self.n) if self.n else PowerLogSum())

    def _split(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return r, r >= self.junction

    def value(self, r):
        r, out_mask = self._split(r)
        res = np.zeros_like(r)
        if out_mask.any():
            res[out_mask] = self.outer(r[out_mask])
        if self.inner is not None and (~out_mask).any():
            res[~out_mask] = self.inner.value(r[~out_mask])
        return res

    def outer_value(self, r):
        return np.atleast_1d(self.outer(np.asarray(r, dtype=float)))

    def minus_laplacian(self, r):
        """Pointwise ``-Delta`` of the active piece (not valid at the junction)."""
        r, out_mask = self._split(r)
        res = np.zeros_like(r)
        if out_mask.any():
            res[out_mask] = self._minus_lap_outer(r[out_mask])
        if self.inner is not None and (~out_mask).any():
            res[~out_mask] = self.inner.minus_laplacian(r[~out_mask], self.n)
        return res

    def to_dict(self) -> dict:
        return {
            "junction": self.junction,
            "inner": {"kind": "zero"} if self.inner is None else self.inner.to_dict(),
            "outer": self.outer.to_dicts(),
        }

    @classmethod
    def from_dict(cls, d: dict, n: int) -> "Piecewise":
        inner = d["inner"]
        inner_obj = None if inner["kind"] == "zero" else InnerPower(
            float(inner["A"]), float(inner["alpha"]), float(inner["eps"]))
        return cls(float(d["junction"]), PowerLogSum.from_dicts(d["outer"]), inner_obj, n)


COMPONENTS = ("u", "v", "w")


@dataclass(frozen=True)
class BarrierTriple:
    """Sub- or super-solution triple ``(u, v, w)``.

    Parameters
    ----------
    role : {"sub", "super"}
    regime : {"supercritical", "critical"}
    problem : Problem
    components : tuple of Piecewise
        ``(u, v, w)`` in that order.
    params : dict
        Constants chosen by the builder (``eps``, ``k``, ``c``, ``mu``, ``R``, ...).
    radii : dict
        Named radii from the construction, e.g. ``r1``, ``r2``, ``r3``.
    """

    role: str
    regime: str
    problem: Problem
    components: tuple
    params: dict
    radii: dict

    def __post_init__(self):
        if self.role not in ("sub", "super"):
            raise ValueError(f"role must be sub or super, got {self.role!r}")
        if self.regime not in ("supercritical", "critical"):
            raise ValueError(f"unknown regime {self.regime!r}")

    @property
    def u(self) -> Piecewise:
        return self.components[0]

    @property
    def v(self) -> Piecewise:
        return self.components[1]

    @property
    def w(self) -> Piecewise:
        return self.components[2]

    @property
    def junctions(self) -> tuple:
        return tuple(c.junction for c in self.components)

    def values(self, r) -> np.ndarray:
        """Array of shape ``(3, len(r))`` with ``u, v, w`` sampled at ``r``."""
        return np.stack([c.value(r) for c in self.components])

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "role": self.role,
            "regime": self.regime,
            "problem": self.problem.to_dict(),
            "params": dict(self.params),
            "components": {name: comp.to_dict()
                           for name, comp in zip(COMPONENTS, self.components)},
            "radii": dict(self.radii),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "BarrierTriple":
        pr = d["problem"]
        prob = Problem(int(pr["n"]), float(pr["p"]), float(pr["b"]))
        comps = tuple(Piecewise.from_dict(d["components"][k], prob.n) for k in COMPONENTS)
        return cls(d["role"], d["regime"], prob, comps, dict(d["params"]), dict(d["radii"]))

    @classmethod
    def from_json(cls, text: str) -> "BarrierTriple":
        return cls.from_dict(json.loads(text))


def inner_super_pieces(prob: Problem, eps: float) -> tuple[InnerPower, InnerPower, InnerPower]:
    n, m, L = prob.n, prob.m, prob.L
    return (
        InnerPower(L, m, eps),
        InnerPower(m * (n - 2 - m) * L, m + 2, eps),
        InnerPower(m * (m + 2) * (n - 2 - m) * (n - 4 - m) * L, m + 4, eps),
    )


def minus_laplacian_chain(u_out: PowerLogSum, n: int) -> tuple[PowerLogSum, PowerLogSum, PowerLogSum]:
    """``(u, -Delta u, Delta^2 u)`` as exact sums."""
    v_out = -radial_laplacian(u_out, n)
    w_out = -radial_laplacian(v_out, n)
    return u_out, v_out, w_out


def scan_sign_changes(fun, lo: float, hi: float, num: int = 1000) -> list[tuple[float, float]]:
    """Brackets ``(a, b)`` of sign changes of ``fun`` on a log-spaced scan."""
    r = np.geomspace(lo, hi, num + 1)
    with np.errstate(all="ignore"):
        vals = np.asarray(fun(r), dtype=float)
    s = np.sign(vals)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    exact = np.nonzero(s == 0)[0]
    brackets = [(float(r[i]), float(r[i + 1])) for i in idx]
    brackets += [(float(r[i]), float(r[i])) for i in exact]
    return sorted(brackets)
