"""Command-line front end.

Exit codes: 0 success, 1 a verification or numerical failure, 2 usage or parse
errors.  Every flag can also come from ``--config file.json``; flags given on
the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import verify
from .asympt import fiber_function, oscillatory_eval, oscillatory_terms_from_expansion, paired_table
from .errors import FiberPolesError, ParseError, UnsupportedFamily
from .fiber import FiberSamples, exact_fiber_1d, fit_expansion, sample_fiber_integral
from .mellin import TwoSidedFunction, mellin_continue
from .milnor1d import FiniteFiber, gamma_cycle, gamma_hat, pham_eigenvalues, pham_spectrum, predict_pole_cosets
from .model import (
    BrieskornPham,
    ExponentLattice,
    Monomial1D,
    PhaseGerm,
    RegionCombination,
    TestDensity,
    boundary_at_origin,
    parse_lattice,
)


class UsageError(Exception):
    pass


def _count(text) -> int:
    # accepts 1e6, 1000000, 1_000_000
    try:
        v = float(str(text).replace("_", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}") from None
    if v < 1 or v != int(v):
        raise argparse.ArgumentTypeError(f"not a positive integer count: {text!r}")
    return int(v)


def _floats(text) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, default=str)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "config")}


def _setup(args):
    phase = PhaseGerm.parse(args.phase, radius=args.radius, s0=args.s0)
    A = RegionCombination.parse(args.region, phase)
    A.validate(phase)
    g = TestDensity.parse(args.g, phase.dim, radius=args.radius)
    return phase, A, g


def _auto_lattice(phase: PhaseGerm, nu_max: int) -> ExponentLattice:
    fam = phase.family
    if isinstance(fam, Monomial1D):
        return pham_spectrum((fam.k,), nu_max=nu_max, integers=True)
    if isinstance(fam, BrieskornPham):
        return pham_spectrum(fam.exponents, nu_max=nu_max, integers=True)
    raise UnsupportedFamily("--candidates auto needs a monomial or Brieskorn-Pham phase; "
                            "pass explicit cosets such as '1/3,2/3,0^2'")


# ---------------------------------------------------------------------------
# subcommands


def _boundary_flag(phase, A):
    # None when the family has no boundary test; False warns that boundary
    # terms may show up at integer poles
    try:
        return boundary_at_origin(phase, A)
    except UnsupportedFamily:
        return None


def cmd_fiber(args) -> int:
    phase, A, g = _setup(args)
    S = sample_fiber_integral(phase, A, g, n=args.n, seed=args.seed, batches=args.batches,
                              workers=args.workers)
    S.meta["config"] = _config(args)
    text = S.to_csv(args.out)
    summary = {"sides": S.sides, "bins": {s: int(np.sum(S.side == s)) for s in S.sides},
               "n_used": S.meta["n"], "seed": args.seed, "out": args.out,
               "boundary_at_origin": _boundary_flag(phase, A)}
    if args.out:
        _emit(summary)
    else:
        sys.stdout.write(text)
        print(json.dumps(summary), file=sys.stderr)
    return 0


def _bump(s0: float) -> TwoSidedFunction:
    def b(x):
        x = np.asarray(x, float) / s0
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x < 1, np.exp(1 - 1 / np.maximum(1 - x * x, 1e-300)), 0.0)
    return TwoSidedFunction(b, b, s0, s0, None, "profile", smooth=True)


def cmd_mellin(args) -> int:
    sources = sum(bool(x) for x in (args.samples, args.oracle, args.builtin))
    if sources != 1:
        raise UsageError("give exactly one of --samples CSV, --oracle or --builtin bump")
    info = {}
    if args.builtin:
        if args.builtin != "bump":
            raise UsageError(f"unknown builtin {args.builtin!r}")
        fn = _bump(args.s0 or 0.25)
        lat = parse_lattice(args.candidates if args.candidates != "auto" else "0", args.nu_max)
    elif args.samples:
        try:
            S = FiberSamples.from_csv(args.samples)
        except (OSError, ValueError, KeyError) as e:
            raise UsageError(f"cannot read samples: {e}") from None
        phase = PhaseGerm.parse(S.meta["phase"]) if "phase" in S.meta else None
        if args.candidates == "auto":
            if phase is None:
                raise UsageError("--candidates auto needs a CSV that records its phase")
            lat = _auto_lattice(phase, args.nu_max)
        else:
            lat = parse_lattice(args.candidates, args.nu_max)
        window = (0.0, args.window) if args.window else None
        exp = fit_expansion(S, lat, dim=S.meta.get("dim", phase.dim if phase else 1), window=window)
        fn = S.to_function(exp)
        info["fit_residual"] = exp.residual
    else:
        if not args.phase:
            raise UsageError("--oracle needs --phase")
        phase, A, g = _setup(args)
        lat = _auto_lattice(phase, args.nu_max) if args.candidates == "auto" else \
            parse_lattice(args.candidates, args.nu_max)
        if isinstance(phase.family, Monomial1D):
            fn = exact_fiber_1d(phase, A, g)
        else:
            fn = fiber_function(phase, A, g, nu_max=args.nu_max)
    cont = mellin_continue(fn, lat, rel_tol=args.rel_tol, z=args.z, validate=bool(args.oracle))
    table = cont.poles if args.normalized else cont.poles.unnormalized()
    _emit({"config": _config(args), "lattice": {str(u): m for u, m in lat.cosets.items()},
           "poles": table.to_records(), "cosets": {str(u): m for u, m in table.cosets().items()},
           **info}, args.out)
    return 0


def cmd_oscillate(args) -> int:
    phase, A, g = _setup(args)
    taus = np.asarray(args.tau if args.tau else np.geomspace(args.tau_min, args.tau_max, args.tau_count))
    J = fiber_function(phase, A, g, nu_max=args.nu_max)
    vals = np.array([oscillatory_eval(phase, A, g, args.direction * t, J=J) for t in taus])
    terms = oscillatory_terms_from_expansion(J.expansion, direction=args.direction)
    text = paired_table(taus, vals, terms)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        _emit({"config": _config(args), "terms": [
            {"r": str(t.r), "j": t.j, "coef": [t.coef.real, t.coef.imag]} for t in terms]})
    else:
        sys.stdout.write(text)
    return 0


def cmd_cycle(args) -> int:
    fib = FiniteFiber(args.k, args.eps)
    phase = PhaseGerm.monomial(args.k, args.eps)
    A = RegionCombination.parse(args.region, phase)
    A.validate(phase)
    cyc = gamma_hat(fib, A, phase=phase) if args.hat else gamma_cycle(fib, A)
    pred = predict_pole_cosets(fib, A, which=args.which)
    _emit({"config": _config(args), "kind": "gamma_hat" if args.hat else "gamma", **cyc.report(),
           "predicted_orders": {str(u): m for u, m in pred.items()}}, args.out)
    return 0


def cmd_spectrum(args) -> int:
    try:
        exps = [int(a) for a in args.exponents.split(",") if a.strip()]
    except ValueError:
        raise UsageError(f"bad exponent list {args.exponents!r}") from None
    if not exps or any(a < 2 for a in exps):
        raise UsageError("exponents must be integers >= 2")
    eig = pham_eigenvalues(exps)
    lat = pham_spectrum(exps, nu_max=args.nu_max, integers=args.integers)
    _emit({"config": _config(args),
           "eigenvalues": {f"exp(-2 i pi {u})": m for u, m in sorted(eig.items())},
           "lattice": {str(u): m for u, m in sorted(lat.cosets.items())},
           "exponents": [[str(r), m] for r, m in lat.exponents()]}, args.out)
    return 0


def cmd_verify(args) -> int:
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    if any(n not in verify.SUITES for n in names):
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(verify.SUITES)}")
    numbers = {v: k for k, v in verify.CRITERIA.items()}
    results = []
    for name in names:
        res = verify.run(name, n=args.n, seed=args.seed)
        print(res.line(numbers.get(name)), file=sys.stderr)
        results.append(res)
    _emit({"config": _config(args), "passed": all(r.passed for r in results),
           "suites": [{"name": r.name, "criterion": numbers.get(r.name), "passed": r.passed,
                       "summary": r.summary, "seconds": r.seconds, "details": r.details} for r in results]},
          args.out)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# parser


def _phase_args(p, required=True):
    p.add_argument("--phase", required=required, help='polynomial in x (and y), e.g. "x^2 - y^2"')
    p.add_argument("--region", default="all:1", help='"+:1,-:1", "all:1", "+0+:1+2i"')
    p.add_argument("--g", default="1", help="polynomial part of the test density")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--s0", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fiberpoles", description=__doc__.split("\n")[0])
    ap.add_argument("--config", help="JSON file mirroring the flags (flat or per-command sections)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fiber", help="Monte Carlo estimate of the fiber density J")
    _phase_args(p)
    p.add_argument("--n", type=_count, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batches", type=int, default=16)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("mellin", help="pole table of the continued Mellin transform")
    _phase_args(p, required=False)
    p.add_argument("--samples", help="FiberSamples CSV written by 'fiber'")
    p.add_argument("--oracle", action="store_true", help="use the exact or level-set oracle for --phase")
    p.add_argument("--builtin", help="'bump': a smooth compactly supported profile")
    p.add_argument("--candidates", default="auto", help="'auto' or cosets like '1/3,2/3,0^2'")
    p.add_argument("--nu-max", type=int, default=3)
    p.add_argument("--window", type=float, default=None, help="fit only |s| below this value")
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.add_argument("--z", type=float, default=5.0)
    p.add_argument("--normalized", action="store_true", help="report parts of F rather than M phi")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mellin)

    p = sub.add_parser("oscillate", help="oscillatory integral against its asymptotic terms")
    _phase_args(p)
    p.add_argument("--tau", type=_floats, default=None)
    p.add_argument("--tau-min", type=float, default=10.0)
    p.add_argument("--tau-max", type=float, default=1000.0)
    p.add_argument("--tau-count", type=int, default=7)
    p.add_argument("--direction", type=int, choices=(1, -1), default=1)
    p.add_argument("--nu-max", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oscillate)

    p = sub.add_parser("cycle", help="Gamma(A) on the finite fiber of eps x^k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=int, choices=(1, -1), default=1)
    p.add_argument("--region", default="+:1,-:1")
    p.add_argument("--hat", action="store_true", help="report the closed lift instead")
    p.add_argument("--which", choices=("auto", "gamma", "hat"), default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("spectrum", help="monodromy eigenvalues and candidate lattice of a Brieskorn-Pham phase")
    p.add_argument("--exponents", required=True, help="e.g. 3,2")
    p.add_argument("--nu-max", type=int, default=3)
    p.add_argument("--integers", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run built-in verification suites")
    p.add_argument("suite", help="all, " + ", ".join(verify.SUITES))
    p.add_argument("--n", type=_count, default=None, help="Monte Carlo sample count for mc-2d")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


def _apply_config(ap, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot read config {known.config}: {e}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    sub = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    for name, parser in sub.choices.items():
        flat = {k.replace("-", "_"): v for k, v in cfg.items() if not isinstance(v, dict)}
        flat.update({k.replace("-", "_"): v for k, v in cfg.get(name, {}).items()})
        dests = {a.dest for a in parser._actions}
        parser.set_defaults(**{k: v for k, v in flat.items() if k in dests})
        # a value from the file satisfies a required flag
        for a in parser._actions:
            if a.dest in flat and a.required:
                a.required = False


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
        try:
            args = ap.parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)
        return args.func(args)
    except (UsageError, ParseError, UnsupportedFamily) as e:
        print(f"fiberpoles: error: {e}", file=sys.stderr)
        return 2
    except (FiberPolesError, ValueError) as e:
        print(f"fiberpoles: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
