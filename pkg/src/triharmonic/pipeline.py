"""Barrier pair, grid and steady-state run for one ``(n, p, b)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .asymptotics import (FitResult, default_window, fit_critical, fit_supercritical,
                          regime_discrimination)
from .barriers import (BarrierTriple, build_sub_critical, build_sub_supercritical,
                       build_super_critical, build_super_supercritical)
from .evolve import RadialGrid, RunOptions, SteadyResult, init_state, run_to_steady
from .exponents import Problem
from .spectrum import Spectrum, solve_spectrum


@dataclass(frozen=True)
class BarrierPair:
    problem: Problem
    spectrum: Spectrum
    sub: BarrierTriple
    sup: BarrierTriple

    @property
    def regime(self) -> str:
        return "critical" if self.spectrum.degenerate else "supercritical"

    @property
    def junction_max(self) -> float:
        return max(self.sub.junctions + self.sup.junctions)

    @property
    def r3_bar(self) -> float:
        return self.sup.radii["r3_bar"]


def build_barriers(prob: Problem, eps: Optional[float] = None, k: Optional[float] = None,
                   c: Optional[float] = None, beta: Optional[float] = None,
                   mu: Optional[float] = None) -> BarrierPair:
    """Sub- and super-solution for ``prob``; the regime follows from the spectrum."""
    spec = solve_spectrum(prob)
    if spec.degenerate:
        if k is not None:
            raise ValueError("k applies to the supercritical regime only")
        sub = build_sub_critical(prob, spec, mu=mu)
        kw = {} if beta is None else {"beta": beta}
        sup = build_super_critical(prob, spec, eps=eps, c=c, sub=sub, **kw)
    else:
        if beta is not None or mu is not None:
            raise ValueError("beta and mu apply to the critical regime only")
        sub = build_sub_supercritical(prob, spec)
        sup = build_super_supercritical(prob, spec, eps=eps, k=k, c=c, sub=sub)
    return BarrierPair(prob, spec, sub, sup)


def default_scheme(regime: str) -> str:
    """Stencil for a regime.

    Supercritical runs use the volume stencil. At ``p = p_JL`` the sandwich is
    thinner than the ``O(h^2)`` stencil bias in the far field; there the flow
    with the volume stencil crossed the super-solution and blew up, so the
    conservative stencil (biased the other way) is used instead.
    """
    return "conservative" if regime == "critical" else "volume"


def make_grid(pair: BarrierPair, N: int, r_max_factor: float = 8.0,
              scheme: Optional[str] = None) -> RadialGrid:
    """Grid on ``[0, r_max_factor * r3_bar]``."""
    scheme = default_scheme(pair.regime) if scheme is None else scheme
    return RadialGrid(pair.problem.n, N, r_max_factor * pair.r3_bar, scheme)


def run_steady(pair: BarrierPair, grid: RadialGrid,
               opts: Optional[RunOptions] = None) -> SteadyResult:
    return run_to_steady(init_state(pair.sub, grid), pair.sup, grid, pair.sub, opts)


def fit_profile(pair: BarrierPair, r, u, window=None, h: Optional[float] = None,
                scheme: str = "volume", r_max: Optional[float] = None) -> FitResult:
    """Regime-appropriate far-field fit, with the regime discrimination attached."""
    if window is None:
        if r_max is None:
            raise ValueError("need a window or r_max")
        window = default_window(pair.junction_max, r_max)
    if pair.spectrum.degenerate:
        fit = fit_critical(r, u, pair.problem, pair.spectrum, pair.sub.params["R"], window,
                           h=h, scheme=scheme, junction_max=pair.junction_max, r_max=r_max)
    else:
        fit = fit_supercritical(r, u, pair.problem, pair.spectrum, window, h=h, scheme=scheme,
                                junction_max=pair.junction_max, r_max=r_max)
    try:
        fit.diagnostics["regimes"] = regime_discrimination(r, u, pair.problem, window,
                                                           h=h, scheme=scheme)
    except ValueError as exc:
        fit.diagnostics["regimes"] = {"error": str(exc)}
    return fit
