"""Scikit-learn style wrappers around the far-field fits and the steady solver.

The regressors treat ``X`` as a single column of radii and ``y`` as the
profile ``u(r)``; ``predict`` evaluates the fitted two-term expansion.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .asymptotics import fit_critical, fit_supercritical, regime_discrimination
from .evolve import RunOptions
from .exponents import Problem
from .pipeline import build_barriers, make_grid, run_steady
from .spectrum import solve_spectrum


def _radii(X):
    X = check_array(X, ensure_2d=True)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single column of radii, got {X.shape[1]} columns")
    r = X[:, 0]
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    return r


class _ExpansionRegressor(RegressorMixin, BaseEstimator):
    def __init__(self, n=20, p="1.5xjl", b=1.0, window=None, h=None, scheme="volume"):
        self.n = n
        self.p = p
        self.b = b
        self.window = window
        self.h = h
        self.scheme = scheme

    def _setup(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=True, y_numeric=True)
        r = _radii(X)
        prob = Problem.parse(self.n, self.p, self.b)
        spec = solve_spectrum(prob)
        window = (r.min(), r.max()) if self.window is None else tuple(self.window)
        return r, y, prob, spec, window

    def _store(self, res, prob):
        est = res.estimates
        self.result_ = res
        self.problem_ = prob
        self.L_, self.m_, self.b_, self.l_ = est["L"], est["m"], est["b"], est["l"]
        self.n_features_in_ = 1
        return self

    def regime_curvature(self, X, y) -> dict:
        """Power- and log-model residual curvature on ``(X, y)``; see
        :func:`~triharmonic.asymptotics.regime_discrimination`."""
        X, y = check_X_y(X, y)
        r = _radii(X)
        prob = Problem.parse(self.n, self.p, self.b)
        window = (r.min(), r.max()) if self.window is None else tuple(self.window)
        return regime_discrimination(r, y, prob, window, h=self.h, scheme=self.scheme)


class SupercriticalExpansionRegressor(_ExpansionRegressor):
    """Fits ``u ~ L r^-m - b r^-l`` for ``p > p_JL``.

    Attributes
    ----------
    L_, m_ : float
        Leading-order level and decay from the log-log regression.
    b_, l_ : float
        Second-term amplitude and decay, regressed on the defect against the
        exact singular solution.
    result_ : FitResult
    """

    def fit(self, X, y):
        r, y, prob, spec, window = self._setup(X, y)
        res = fit_supercritical(r, y, prob, spec, window, h=self.h, scheme=self.scheme)
        return self._store(res, prob)

    def predict(self, X):
        check_is_fitted(self, "result_")
        r = _radii(X)
        prob = self.problem_
        b = 0.0 if not np.isfinite(self.b_) else self.b_
        return prob.L * r ** (-prob.m) - b * r ** (-self.l_)


class CriticalExpansionRegressor(_ExpansionRegressor):
    """Fits ``u ~ L r^-m - b r^-l log(r / R_hat)`` at ``p = p_JL``.

    ``R`` is the reference radius reported next to ``R_hat_``; it defaults to
    the one of the critical sub-solution.
    """

    def __init__(self, n=20, p="jl", b=1.0, R=None, window=None, h=None, scheme="volume"):
        super().__init__(n=n, p=p, b=b, window=window, h=h, scheme=scheme)
        self.R = R

    def fit(self, X, y):
        r, y, prob, spec, window = self._setup(X, y)
        R = self.R
        if R is None:
            R = build_barriers(prob).sub.params["R"]
        res = fit_critical(r, y, prob, spec, R, window, h=self.h, scheme=self.scheme)
        self._store(res, prob)
        self.R_hat_ = res.estimates["R_hat"]
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        r = _radii(X)
        prob = self.problem_
        b, R = self.b_, self.R_hat_
        if not (np.isfinite(b) and np.isfinite(R)):
            b, R = 0.0, 1.0
        return prob.L * r ** (-prob.m) - b * r ** (-self.l_) * np.log(r / R)


class SteadyStateSolver(BaseEstimator):
    """Evolves the parabolic system from the sub-solution to its steady state.

    There is no training data: ``fit()`` runs the evolution for the configured
    problem and ``predict(X)`` interpolates the steady ``u`` at radii ``X``.

    Attributes
    ----------
    barriers_ : BarrierPair
    grid_ : RadialGrid
    result_ : SteadyResult
    """

    def __init__(self, n=20, p="1.5xjl", b=1.0, N=2000, r_max_factor=8.0, scheme=None,
                 stepper="implicit", max_steps=10_000_000, strict=False):
        self.n = n
        self.p = p
        self.b = b
        self.N = N
        self.r_max_factor = r_max_factor
        self.scheme = scheme
        self.stepper = stepper
        self.max_steps = max_steps
        self.strict = strict

    def fit(self, X=None, y=None):
        prob = Problem.parse(self.n, self.p, self.b)
        self.barriers_ = build_barriers(prob)
        self.grid_ = make_grid(self.barriers_, self.N, self.r_max_factor, self.scheme)
        opts = RunOptions(stepper=self.stepper, max_steps=self.max_steps, strict=self.strict)
        self.options_ = opts
        self.result_ = run_steady(self.barriers_, self.grid_, opts)
        return self

    @property
    def profile_(self):
        check_is_fitted(self, "result_")
        return self.grid_.r, self.result_.state.fields

    def predict(self, X):
        check_is_fitted(self, "result_")
        X = check_array(X)
        r = X[:, 0]
        if np.any((r < 0) | (r > self.grid_.r_max)):
            raise ValueError("radii must lie in [0, r_max]")
        return np.interp(r, self.grid_.r, self.result_.state.U)
