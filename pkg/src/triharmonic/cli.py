"""Command-line front end: one subcommand per pipeline stage.

Every subcommand writes its artifacts to ``--out`` and prints a short summary.
Exit codes: 0 success, 1 failed verification (see the JSON report), 2 usage
error. Options can also come from a ``key=value`` file given by ``--config``;
command-line flags override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .asymptotics import default_window, sandwich_certificate
from .barriers import BarrierConstructionError, BarrierTriple, verify_barrier
from .evolve import STEPPERS, SCHEMES, RunOptions, read_profile_csv, run_report, write_profile_csv
from .exponents import ORDERS, Problem, jl_exponent, jl_exponent_ambiguous, sobolev_exponent
from .pipeline import build_barriers, default_scheme, fit_profile, make_grid, run_steady
from .spectrum import solve_spectrum

log = logging.getLogger("triharmonic")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_dims(text: str) -> list[int]:
    """``"15..30"``, ``"15,20,25"`` or ``"20"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"no dimensions in {text!r}")
    return out


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    with open(path) as fh:
        for num, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{num}: expected key=value, got {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _dump(path: str, doc: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True, default=_json_default))
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o))


def _finite(x):
    return None if x is None or not np.isfinite(x) else float(x)


def _problem(args) -> Problem:
    try:
        return Problem.parse(args.n, args.p, args.b)
    except ValueError as exc:
        raise UsageError(f"--n/--p/--b: {exc}") from exc


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def _out(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


# subcommands -----------------------------------------------------------------

def cmd_exponents(args) -> int:
    rows = []
    for n in args.n:
        for k in ORDERS:
            if n <= k:
                continue
            ps = sobolev_exponent(k, n)
            try:
                pj = jl_exponent(k, n)
            except ValueError:
                continue
            rows.append({"n": n, "order": k, "p_S": ps, "p_JL": _finite(pj),
                         "ambiguous": jl_exponent_ambiguous(k, n)})
    _dump(_out(args, "exponents.json"), {"config": _resolved(args), "rows": rows})
    print(f"{'n':>4} {'order':>5} {'p_S':>20} {'p_JL':>20}")
    for row in rows:
        pj = "inf" if row["p_JL"] is None else f"{row['p_JL']:.15g}"
        flag = "  (ambiguous)" if row["ambiguous"] else ""
        print(f"{row['n']:>4} {row['order']:>5} {row['p_S']:>20.15g} {pj:>20}{flag}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    prob = _problem(args)
    try:
        spec = solve_spectrum(prob)
    except ValueError as exc:
        raise UsageError(f"--p: {exc}") from exc
    doc = {"config": _resolved(args), "problem": prob.to_dict(), "spectrum": spec.to_dict()}
    _dump(_out(args, "spectrum.json"), doc)
    print(f"degenerate={str(spec.degenerate).lower()} lambda3={spec.lambda3:.15g} "
          f"lambda4={spec.lambda4:.15g} l={spec.l:.15g} k0={spec.k0:.15g} "
          f"real_ladder={str(spec.real_ladder).lower()}")
    return EXIT_OK


def _pair(args):
    prob = _problem(args)
    try:
        return build_barriers(prob, eps=args.eps, k=args.k, c=args.c, beta=args.beta,
                              mu=args.mu)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_barriers(args) -> int:
    pair = _pair(args)
    ok = True
    for trip in (pair.sub, pair.sup):
        name = trip.role
        with open(_out(args, f"{name}.json"), "w", newline="\n") as fh:
            fh.write(trip.to_json() + "\n")
        rep = verify_barrier(trip)
        _dump(_out(args, f"verify_{name}.json"), {"config": _resolved(args), **rep.to_dict()})
        ok &= rep.passed
        print(f"{name}: {'PASS' if rep.passed else 'FAIL'} junctions="
              + ",".join(f"{j:.10g}" for j in trip.junctions))
        for msg in rep.failures():
            print(f"  {msg}")
    if not ok:
        print(f"verification failed; see {args.out}/verify_*.json", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        with open(args.barrier) as fh:
            trip = BarrierTriple.from_json(fh.read())
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"--barrier: cannot read {args.barrier}: {exc}") from exc
    rep = verify_barrier(trip)
    path = _out(args, f"verify_{trip.role}.json")
    _dump(path, {"config": _resolved(args), **rep.to_dict()})
    print(f"{trip.role}: {'PASS' if rep.passed else 'FAIL'}")
    for msg in rep.failures():
        print(f"  {msg}")
    if not rep.passed:
        print(f"verification failed; see {path}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _run_options(args) -> RunOptions:
    ckpt = _out(args, "checkpoint.csv") if args.checkpoint_every else None
    return RunOptions(stepper=args.stepper, max_steps=args.max_steps, strict=args.strict,
                      checkpoint_every=args.checkpoint_every, checkpoint_path=ckpt)


def cmd_evolve(args) -> int:
    pair = _pair(args)
    try:
        grid = make_grid(pair, args.N, args.r_max_factor, args.scheme)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    opts = _run_options(args)
    res = run_steady(pair, grid, opts)
    write_profile_csv(_out(args, "profile.csv"), grid.r, res.state.fields)
    doc = json.loads(run_report(res, grid, opts, pair.sub, pair.sup))
    doc["config"] = _resolved(args)
    doc["regime"] = pair.regime
    doc["junction_max"] = pair.junction_max
    path = _out(args, "evolve_report.json")
    _dump(path, doc)
    ok = res.converged and res.sandwich_ok and res.monotone_ok
    print(f"converged={str(res.converged).lower()} sandwich_ok={str(res.sandwich_ok).lower()} "
          f"monotone_ok={str(res.monotone_ok).lower()} steps={res.steps} "
          f"residual={max(res.residuals):.3e} u0={res.state.U[0]:.12g}")
    if not ok:
        print(f"run did not pass; see {path}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _load_profile(args):
    try:
        r, X = read_profile_csv(args.profile)
    except (OSError, ValueError) as exc:
        raise UsageError(f"--profile: cannot read {args.profile}: {exc}") from exc
    return r, X


def _grid_spacing(r) -> Optional[float]:
    d = np.diff(r)
    if r[0] == 0 and np.allclose(d, d[0], rtol=1e-9, atol=0):
        return float(d[0])
    return None


def cmd_fit(args) -> int:
    pair = _pair(args)
    r, X = _load_profile(args)
    r_max = float(r[-1])
    if args.window:
        window = tuple(args.window)
    else:
        window = default_window(pair.junction_max, r_max)
        if window[0] >= window[1]:
            raise UsageError(f"default window [4 J, r_max/2] = [{window[0]:.6g}, {window[1]:.6g}] "
                             "is empty; evolve with a larger --r-max-factor or pass --window")
    h = _grid_spacing(r) if args.reference == "discrete" else None
    scheme = args.scheme or default_scheme(pair.regime)
    try:
        fit = fit_profile(pair, r, X[0], window, h=h, scheme=scheme, r_max=r_max)
    except ValueError as exc:
        raise UsageError(f"--window: {exc}") from exc
    checks = fit.check(pair.problem, pair.spectrum)
    regimes = fit.diagnostics.get("regimes", {})
    if pair.regime == "critical" and "power" in regimes:
        checks["log_factor"] = bool(regimes["power"]["ratio"] > 10 and regimes["log"]["ratio"] <= 10)
    ok = all(checks.values())
    doc = {"config": _resolved(args), "problem": pair.problem.to_dict(), "h": h,
           "scheme": scheme, "fit": fit.to_dict(), "checks": checks, "passed": ok}
    path = _out(args, "fit_report.json")
    _dump(path, doc)
    print(" ".join(f"{k}={v:.10g}" for k, v in fit.estimates.items()
                   if isinstance(v, float)))
    print("checks: " + " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))
    if not ok:
        print(f"fit checks failed; see {path}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify(args) -> int:
    pair = _pair(args)
    r, X = _load_profile(args)
    window = tuple(args.window) if args.window else None
    cert = sandwich_certificate(r, X, pair.sub, pair.sup, slack=args.slack, window=window)
    path = _out(args, "certificate.json")
    _dump(path, {"config": _resolved(args), **cert.to_dict()})
    print(f"sandwich_ok={str(cert.ok).lower()} lower_u_min={cert.lower['u']['min']:.3e} "
          f"upper_u_min={cert.upper['u']['min']:.3e}")
    if not cert.ok:
        print(f"certificate failed; see {path}", file=sys.stderr)
    return EXIT_OK if cert.ok else EXIT_FAIL


# parser ----------------------------------------------------------------------

def _problem_flags(sp, p_default="1.5xjl"):
    sp.add_argument("--n", type=int, default=20, help="dimension (>= 15)")
    sp.add_argument("--p", default=p_default,
                    help='exponent: a number, "jl" or a multiple such as "1.5xjl"')
    sp.add_argument("--b", type=float, default=1.0, help="second-term amplitude")


def _barrier_flags(sp):
    sp.add_argument("--eps", type=float, default=None, help="super regularisation (default: ladder)")
    sp.add_argument("--k", type=float, default=None, help="supercritical correction decay")
    sp.add_argument("--c", type=float, default=None, help="super correction amplitude")
    sp.add_argument("--beta", type=float, default=None, help="critical log exponent in (0,1)")
    sp.add_argument("--mu", type=float, default=None, help="critical sub parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triharmonic", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", default=None, help="key=value file")
        sp.add_argument("--out", default="triharmonic-out", help="output directory")
        sp.set_defaults(func=func)
        return sp

    sp = add("exponents", cmd_exponents, "Sobolev and Joseph-Lundgren exponents")
    sp.add_argument("--n", type=parse_dims, default=parse_dims("15..30"),
                    help='dimensions, e.g. "15..30" or "15,20"')

    sp = add("spectrum", cmd_spectrum, "characteristic roots at (n, p)")
    _problem_flags(sp, "jl")

    sp = add("barriers", cmd_barriers, "build and verify the sub/super pair")
    _problem_flags(sp)
    _barrier_flags(sp)

    sp = add("verify", cmd_verify, "re-check a barrier JSON")
    sp.add_argument("--barrier", required=True, help="barrier JSON written by 'barriers'")

    sp = add("evolve", cmd_evolve, "evolve from the sub-solution to steady state")
    _problem_flags(sp)
    _barrier_flags(sp)
    sp.add_argument("--N", type=int, default=2000, help="grid intervals")
    sp.add_argument("--r-max-factor", type=float, default=8.0, help="r_max in units of r3_bar")
    sp.add_argument("--scheme", choices=SCHEMES, default=None,
                    help="stencil (default: volume, conservative at p_JL)")
    sp.add_argument("--stepper", choices=STEPPERS, default="implicit")
    sp.add_argument("--max-steps", type=int, default=10_000_000)
    sp.add_argument("--strict", type=_bool, nargs="?", const=True, default=False,
                    help="abort on the first monitor violation")
    sp.add_argument("--checkpoint-every", type=int, default=None)

    for name, func, help_ in (("fit", cmd_fit, "fit the far-field expansion to a profile"),
                              ("certify", cmd_certify, "check sub <= profile <= super")):
        sp = add(name, func, help_)
        _problem_flags(sp)
        _barrier_flags(sp)
        sp.add_argument("--profile", required=True, help="CSV with header r,u,v,w")
        sp.add_argument("--window", type=float, nargs=2, default=None, metavar=("R_LO", "R_HI"))
        if name == "fit":
            sp.add_argument("--reference", choices=("discrete", "continuum"), default="discrete",
                            help="singular reference for the defect")
            sp.add_argument("--scheme", choices=SCHEMES, default=None)
        else:
            sp.add_argument("--slack", type=float, default=1e-9)
    return parser


def _apply_config(parser, argv):
    """Re-parse with config-file values installed as subcommand defaults."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = read_config(args.config)
    sp = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sp._actions}
    unknown = sorted(set(cfg) - set(known) - {"command"})
    if unknown:
        raise UsageError(f"--config: unknown keys {', '.join(unknown)}")
    conv = {}
    for key, val in cfg.items():
        act = known.get(key)
        if act is None or key == "config":
            continue
        try:
            if act.nargs == 2:
                conv[key] = [act.type(x) for x in val.replace(",", " ").split()]
            elif act.type is not None:
                conv[key] = act.type(val)
            else:
                conv[key] = val
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"--config: bad value for {key}: {exc}") from exc
        if act.choices is not None and conv[key] not in act.choices:
            raise UsageError(f"--config: {key} must be one of {list(act.choices)}")
    sp.set_defaults(**conv)
    return parser.parse_args(argv)


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BarrierConstructionError as exc:
        print(f"barrier construction failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
