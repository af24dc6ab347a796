"""Method-of-lines evolution of the cooperative parabolic system

    U_t = Delta U + V,   V_t = Delta V + W,   W_t = Delta W + |U|^(p-1) U

on a truncated radial grid, started from a sub-solution and monitored against
the sandwich ``sub <= (U, V, W) <= super`` and time-monotonicity.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded

from .barriers import BarrierTriple

log = logging.getLogger(__name__)

STEPPERS = ("explicit", "imex", "implicit")


SCHEMES = ("volume", "conservative")


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes ``r_i = i h``, ``i = 0..N``; node ``N`` carries Dirichlet data.

    Two cooperative second-order discretisations of ``r^(1-n) (r^(n-1) u')'``
    are available; both use face weights ``(r_i +- h/2)^(n-1)`` and differ in
    the normalisation of row ``i``:

    ``"volume"``
        cell volume ``((r_i + h/2)^n - (r_i - h/2)^n) / n`` (finite volumes).
        On decaying powers ``r^-a`` it underestimates ``|Delta|``.
    ``"conservative"``
        ``h r_i^(n-1)``. On decaying powers it overestimates ``|Delta|``.

    All off-diagonal entries are positive, so the semi-discrete system is
    cooperative. At the origin the row is ``2n (u_1 - u_0) / h^2``.
    """

    n: int
    N: int
    r_max: float
    scheme: str = "volume"

    def __post_init__(self):
        if self.N < 100:
            raise ValueError(f"grid needs N >= 100 nodes, got {self.N}")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")

    @property
    def h(self) -> float:
        return self.r_max / self.N

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.N + 1)

    def stencil(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(lower, diag, upper)`` coefficients of the Laplacian rows 0..N-1."""
        n, N, h = self.n, self.N, self.h
        i = np.arange(1, N, dtype=float)
        x = 0.5 / i  # h / (2 r_i)
        if self.scheme == "volume":
            # cell volume / (h r_i^(n-1)), computed without cancellation
            norm = i * (np.expm1(n * np.log1p(x)) - np.expm1(n * np.log1p(-x))) / n
        else:
            norm = np.ones_like(i)
        up = np.exp((n - 1) * np.log1p(x)) / (h * h * norm)
        lo = np.exp((n - 1) * np.log1p(-x)) / (h * h * norm)
        lower = np.concatenate([[0.0], lo])
        upper = np.concatenate([[2.0 * n / h**2], up])
        diag = -(lower + upper)
        return lower, diag, upper

    def laplacian(self) -> sp.csr_matrix:
        """Sparse ``(N+1) x (N+1)`` operator; the Dirichlet row is zero."""
        lower, diag, upper = self.stencil()
        N = self.N
        rows = np.concatenate([np.arange(1, N), np.arange(N), np.arange(N)])
        cols = np.concatenate([np.arange(0, N - 1), np.arange(N), np.arange(1, N + 1)])
        data = np.concatenate([lower[1:], diag, upper])
        return sp.csr_matrix((data, (rows, cols)), shape=(N + 1, N + 1))

    def explicit_dt(self) -> float:
        return self.h**2 / (4 * self.n)

    def to_dict(self) -> dict:
        return {"n": self.n, "N": self.N, "r_max": self.r_max, "h": self.h,
                "scheme": self.scheme}


def stencil_kappa(a: float, n: int, scheme: str = "volume") -> float:
    """Leading relative error of the stencil on ``r^-a`` away from the origin.

    ``Delta_h r^-a = Delta r^-a (1 + kappa h^2 / r^2 + O(h^4 / r^4))``.
    """
    if scheme == "volume":
        return (a + 2) * (a * a - 2 * a * n + 6 * a + n * n - 5 * n + 7) / (12 * (a - n + 2))
    if scheme == "conservative":
        return ((a - n + 4) * (2 * a * a - 2 * a * n + 8 * a + n * n - 5 * n + 8)
                / (24 * (a - n + 2)))
    raise ValueError(f"unknown scheme {scheme!r}")


def apply_laplacian(grid: RadialGrid, u: np.ndarray, cache: Optional[tuple] = None) -> np.ndarray:
    lower, diag, upper = cache if cache is not None else grid.stencil()
    out = np.zeros_like(u)
    out[:-1] = diag * u[:-1] + upper * u[1:]
    out[1:-1] += lower[1:] * u[:-2]
    return out


def reaction(U: np.ndarray, p: float) -> np.ndarray:
    return np.abs(U) ** (p - 1) * U


def semi_discrete_rhs(grid: RadialGrid, X: np.ndarray, p: float, coupled: bool = True,
                      cache: Optional[tuple] = None) -> np.ndarray:
    """Right-hand side of the ODE system; zero on the Dirichlet node."""
    U, V, W = X
    G = np.stack([apply_laplacian(grid, U, cache), apply_laplacian(grid, V, cache),
                  apply_laplacian(grid, W, cache)])
    if coupled:
        G[0] += V
        G[1] += W
        G[2] += reaction(U, p)
    G[:, -1] = 0.0
    return G


@dataclass
class SimState:
    """Time, fields ``(U, V, W)`` on the grid and monitor flags."""

    t: float
    fields: np.ndarray
    step: int = 0
    sandwich_ok: bool = True
    monotone_ok: bool = True
    last_residual: float = np.inf

    @property
    def U(self) -> np.ndarray:
        return self.fields[0]

    @property
    def V(self) -> np.ndarray:
        return self.fields[1]

    @property
    def W(self) -> np.ndarray:
        return self.fields[2]

    def copy(self) -> "SimState":
        return replace(self, fields=self.fields.copy())


def init_state(sub: BarrierTriple, grid: RadialGrid) -> SimState:
    """Fields sampled from a sub-solution triple."""
    if sub.role != "sub":
        raise ValueError("initial data must be a sub-solution (time-monotone flow)")
    if sub.problem.n != grid.n:
        raise ValueError("grid dimension does not match the problem")
    return SimState(t=0.0, fields=sub.values(grid.r))


class Stepper:
    """Advances a :class:`SimState` by one step with a fixed scheme."""

    def __init__(self, grid: RadialGrid, p: float, method: str = "implicit",
                 coupled: bool = True):
        if method not in STEPPERS:
            raise ValueError(f"unknown stepper {method!r}; choose from {STEPPERS}")
        self.grid, self.p, self.method, self.coupled = grid, p, method, coupled
        self._stencil = grid.stencil()
        self._lap = grid.laplacian()

    def rhs(self, X: np.ndarray) -> np.ndarray:
        return semi_discrete_rhs(self.grid, X, self.p, self.coupled, self._stencil)

    def __call__(self, state: SimState, dt: float) -> SimState:
        if not dt > 0:
            raise ValueError("dt must be positive")
        X = state.fields
        if self.method == "explicit":
            new = X + dt * self.rhs(X)
        elif self.method == "imex":
            new = self._imex(X, dt)
        else:
            new = self._linearly_implicit(X, dt)
        out = replace(state, t=state.t + dt, fields=new, step=state.step + 1)
        if not np.all(np.isfinite(new)):
            raise FloatingPointError(f"non-finite fields at t={out.t} (blow-up)")
        return out

    def _imex(self, X: np.ndarray, dt: float) -> np.ndarray:
        # diffusion implicit per field, couplings explicit
        lower, diag, upper = self._stencil
        N = self.grid.N
        ab = np.zeros((3, N + 1))
        ab[0, 1:] = -dt * upper
        ab[1, :-1] = 1 - dt * diag
        ab[1, -1] = 1.0
        ab[2, :-2] = -dt * lower[1:]
        U, V, W = X
        if self.coupled:
            src = np.stack([V, W, reaction(U, self.p)])
        else:
            src = np.zeros_like(X)
        rhs = X + dt * src
        rhs[:, -1] = X[:, -1]
        return np.stack([solve_banded((1, 1), ab, rhs[i]) for i in range(3)])

    def jacobian(self, X: np.ndarray) -> sp.csr_matrix:
        N1 = self.grid.N + 1
        lap = self._lap
        # no coupling into the Dirichlet row
        eye = sp.diags(np.r_[np.ones(N1 - 1), 0.0])
        if self.coupled:
            dr = sp.diags(np.r_[self.p * np.abs(X[0, :-1]) ** (self.p - 1), 0.0])
            blocks = [[lap, eye, None], [None, lap, eye], [dr, None, lap]]
        else:
            blocks = [[lap, None, None], [None, lap, None], [None, None, lap]]
        return sp.bmat(blocks, format="csc")

    def banded_system(self, X: np.ndarray, dt: float) -> np.ndarray:
        """``I - dt J`` in node-interleaved order ``(U_i, V_i, W_i)``, LAPACK band form.

        Entry ``(a, b)`` of the interleaved matrix is stored at ``ab[3 + a - b, b]``.
        """
        lower, diag, upper = self._stencil
        N1 = self.grid.N + 1
        ab = np.zeros((7, 3 * N1))
        for c in range(3):
            idx = 3 * np.arange(N1 - 1) + c
            ab[3, idx] = 1 - dt * diag
            ab[0, idx + 3] = -dt * upper          # (i, i+1) within field c
            ab[6, idx[:-1]] = -dt * lower[1:]     # (i+1, i) within field c
            ab[3, 3 * (N1 - 1) + c] = 1.0         # Dirichlet row
        if self.coupled:
            i = 3 * np.arange(N1 - 1)
            ab[2, i + 1] = -dt                    # V_i into the U equation
            ab[2, i + 2] = -dt                    # W_i into the V equation
            ab[5, i] = -dt * self.p * np.abs(X[0, :-1]) ** (self.p - 1)  # U_i into W
        return ab

    def _linearly_implicit(self, X: np.ndarray, dt: float) -> np.ndarray:
        # (I - dt J) delta = dt G(X): one Newton step of backward Euler
        ab = self.banded_system(X, dt)
        rhs = dt * self.rhs(X).T.ravel()
        delta = solve_banded((3, 3), ab, rhs, overwrite_ab=True, overwrite_b=True)
        return X + delta.reshape(-1, 3).T


def newton_steady(grid: RadialGrid, p: float, X0: np.ndarray, tol: float = 1e-12,
                  maxiter: int = 100) -> tuple[np.ndarray, bool, int]:
    """Damped Newton solve of the stationary discrete system ``G(X) = 0``.

    The Dirichlet node keeps its value from ``X0``. Returns the solution,
    a convergence flag (``||G_i|| / max|X_i| < tol`` for every field) and the
    iteration count. Used as an oracle for steady states.
    """
    stp = Stepper(grid, p, "implicit")
    X = np.array(X0, dtype=float)
    big = 1e30  # I - big*J, rescaled below, is -J up to the identity term
    for it in range(maxiter):
        G = stp.rhs(X)
        res = max(field_residuals(G, X))
        if res < tol:
            return X, True, it
        ab = stp.banded_system(X, big) / big
        ab[3, 3 * grid.N:] = 1.0
        delta = solve_banded((3, 3), ab, G.T.ravel()).reshape(-1, 3).T
        lam = 1.0
        while lam > 1e-4:
            trial = X + lam * delta
            if np.all(np.isfinite(trial)) and max(field_residuals(stp.rhs(trial), trial)) < res:
                break
            lam /= 2
        X = trial
    G = stp.rhs(X)
    return X, max(field_residuals(G, X)) < tol, maxiter


def step(state: SimState, dt: float, grid: RadialGrid, p: float,
         method: str = "explicit", coupled: bool = True) -> SimState:
    """Advance one step; see :class:`Stepper`."""
    return Stepper(grid, p, method, coupled)(state, dt)


@dataclass
class RunOptions:
    """Controls for :func:`run_to_steady`.

    ``max_steps`` counts accepted steps. ``dt=None`` picks ``h^2/(4n)`` for
    the explicit scheme, ten times that for ``imex``, and starts the implicit
    scheme at ``h^2``. By default the implicit scheme scales ``dt`` by the
    ratio of successive residuals, capped at ``dt_growth`` and floored at 0.1
    (switched evolution relaxation). With ``lte_tol`` set it uses step
    doubling instead: a step is accepted when the full step and two half
    steps agree to ``lte_tol`` relative to the field scale.
    """

    stepper: str = "implicit"
    dt: Optional[float] = None
    dt_growth: float = 1.5
    dt_max: float = np.inf
    lte_tol: Optional[float] = None
    max_steps: int = 10_000_000
    check_interval: int = 100
    steady_rtol: float = 1e-8
    sandwich_slack: float = 1e-10
    monotone_slack: float = 1e-12
    strict: bool = False
    checkpoint_every: Optional[int] = None
    checkpoint_path: Optional[str] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dt_max"] = None if not np.isfinite(self.dt_max) else self.dt_max
        return d


@dataclass
class SteadyResult:
    """Final state, convergence flag, per-field residuals and monitor history."""

    state: SimState
    converged: bool
    residuals: list
    steps: int
    history: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    rejected: int = 0

    @property
    def sandwich_ok(self) -> bool:
        return self.state.sandwich_ok

    @property
    def monotone_ok(self) -> bool:
        return self.state.monotone_ok

    def summary(self) -> dict:
        return {"converged": self.converged, "residuals": self.residuals,
                "steps": self.steps, "rejected_steps": self.rejected, "t": self.state.t,
                "sandwich_ok": self.sandwich_ok, "monotone_ok": self.monotone_ok,
                "checks": len(self.history), "violations": self.violations[:20],
                "n_violations": len(self.violations)}


class MonitorViolation(RuntimeError):
    pass


def field_residuals(G: np.ndarray, X: np.ndarray) -> list[float]:
    """``||G_i||_inf / max|X_i|`` per field."""
    out = []
    for g, x in zip(G, X):
        scale = np.max(np.abs(x))
        out.append(float(np.max(np.abs(g)) / scale) if scale > 0 else float(np.max(np.abs(g))))
    return out


def write_profile_csv(path: str, r: np.ndarray, X: np.ndarray) -> None:
    """CSV with header ``r,u,v,w`` and 17 significant digits, LF line endings."""
    data = np.column_stack([r, X[0], X[1], X[2]])
    np.savetxt(path, data, delimiter=",", header="r,u,v,w", comments="",
               fmt="%.17g", newline="\n")


def read_profile_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:4].T


def _controlled_step(stepper: Stepper, st: SimState, dt: float, tol: float,
                     growth: float, dt_max: float) -> tuple[SimState, float, int]:
    """One accepted implicit step; returns ``(state, next_dt, rejected)``."""
    rejected = 0
    while True:
        try:
            full = stepper(st, dt)
            half = stepper(stepper(st, dt / 2), dt / 2)
        except FloatingPointError:
            err = np.inf
        else:
            scale = np.max(np.abs(half.fields), axis=1, keepdims=True)
            scale = np.where(scale > 0, scale, 1.0)
            err = float(np.max(np.abs(full.fields - half.fields) / scale))
        if err <= tol:
            fac = growth if err == 0 else min(growth, 0.9 * np.sqrt(tol / err))
            out = replace(full, step=st.step + 1)
            return out, min(max(fac, 1.0) * dt, dt_max), rejected
        rejected += 1
        if rejected > 60:
            raise FloatingPointError(f"step size collapsed at t={st.t}")
        dt *= max(0.2, 0.9 * np.sqrt(tol / err)) if np.isfinite(err) else 0.2


def run_to_steady(state: SimState, sup: BarrierTriple, grid: RadialGrid,
                  sub: Optional[BarrierTriple] = None,
                  opts: Optional[RunOptions] = None) -> SteadyResult:
    """Evolve until the semi-discrete residual falls below ``steady_rtol``.

    Parameters
    ----------
    state : SimState
        Initial state, normally :func:`init_state` of ``sub``.
    sup : BarrierTriple
        Super-solution for the upper sandwich bound.
    grid : RadialGrid
    sub : BarrierTriple, optional
        Lower sandwich bound; the initial fields are used when omitted.
    opts : RunOptions, optional

    Returns
    -------
    SteadyResult
    """
    opts = RunOptions() if opts is None else opts
    if sup.role != "super":
        raise ValueError("upper barrier must be a super-solution")
    if sub is not None and sub.problem != sup.problem:
        raise ValueError("sub and super come from different problems")
    p = sup.problem.p
    r = grid.r
    lower = state.fields.copy() if sub is None else sub.values(r)
    upper = sup.values(r)
    stepper = Stepper(grid, p, opts.stepper)
    if opts.dt is not None:
        dt = opts.dt
    elif opts.stepper == "explicit":
        dt = grid.explicit_dt()
    elif opts.stepper == "imex":
        dt = 10 * grid.explicit_dt()
    else:
        dt = grid.h**2
    growth = opts.dt_growth if opts.stepper == "implicit" else 1.0

    st = state.copy()
    history, violations = [], []
    snapshot = st.fields.copy()
    converged = False
    rejected = 0
    res = field_residuals(stepper.rhs(st.fields), st.fields)

    def check(cur: SimState, prev: np.ndarray):
        scale = np.max(np.abs(cur.fields), axis=1, keepdims=True)
        scale = np.where(scale > 0, scale, 1.0)
        below = np.max((lower - cur.fields) / scale, axis=0)
        above = np.max((cur.fields - upper) / scale, axis=0)
        drop = np.max((prev - cur.fields) / scale, axis=0)
        low, high, mono = below.max(), above.max(), drop.max()
        sand = bool(low <= opts.sandwich_slack and high <= opts.sandwich_slack)
        mon = bool(mono <= opts.monotone_slack)
        rec = {"step": cur.step, "t": cur.t, "below_sub": float(low),
               "above_super": float(high), "decrease": float(mono),
               "r_below_sub": float(r[np.argmax(below)]),
               "r_above_super": float(r[np.argmax(above)]),
               "r_decrease": float(r[np.argmax(drop)]),
               "sandwich_ok": sand, "monotone_ok": mon}
        history.append(rec)
        if not (sand and mon):
            violations.append(rec)
            cur.sandwich_ok &= sand
            cur.monotone_ok &= mon
            if opts.strict:
                raise MonitorViolation(f"monitor violated at step {cur.step}: {rec}")

    while st.step < opts.max_steps:
        if max(res) < opts.steady_rtol:
            converged = True
            break
        if opts.stepper == "implicit" and opts.lte_tol is not None:
            st, dt, nrej = _controlled_step(stepper, st, dt, opts.lte_tol, growth, opts.dt_max)
            rejected += nrej
        else:
            st = stepper(st, dt)
            prev = max(res)
        res = field_residuals(stepper.rhs(st.fields), st.fields)
        if opts.stepper == "implicit" and opts.lte_tol is None:
            # switched evolution relaxation: grow dt while the residual falls
            ratio = prev / max(res) if max(res) > 0 else growth
            dt = min(dt * min(growth, max(ratio, 0.1)), opts.dt_max)
        st.last_residual = max(res)
        interval = 1 if opts.stepper == "implicit" else opts.check_interval
        if st.step % interval == 0:
            check(st, snapshot)
            snapshot = st.fields.copy()
        if (opts.checkpoint_every and opts.checkpoint_path
                and st.step % opts.checkpoint_every == 0):
            write_profile_csv(opts.checkpoint_path, r, st.fields)
    if not history or history[-1]["step"] != st.step:
        check(st, snapshot)
    if max(res) < opts.steady_rtol:
        converged = True
    log.info("run finished: steps=%d t=%.6g residual=%.3e converged=%s",
             st.step, st.t, max(res), converged)
    return SteadyResult(state=st, converged=converged, residuals=res, steps=st.step,
                        history=history, violations=violations, rejected=rejected)


def run_report(result: SteadyResult, grid: RadialGrid, opts: RunOptions,
               sub: BarrierTriple, sup: BarrierTriple) -> str:
    """JSON run metadata (no wall-clock content)."""
    doc = {"grid": grid.to_dict(), "options": opts.to_dict(),
           "boundary": "dirichlet: fields pinned to the sub-solution at r_max",
           "problem": sup.problem.to_dict(), "sub_params": sub.params,
           "super_params": sup.params, "result": result.summary()}
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))
