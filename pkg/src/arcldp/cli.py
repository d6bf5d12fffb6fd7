"""Command-line front end.

Each subcommand writes its tables and a JSON summary into ``--out`` and
prints the summary to stdout.  Exit status: 0 success, 1 usage error,
2 numerical failure, 3 verification FAIL.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .cache import ResultsCache, canonical_json, default_cache_dir, write_json_atomic
from .numerics import (BracketError, PrecisionPolicy, QuadratureError, angle_value,
                       parse_angle)
from .spectrum import DEFAULT_C, PrecisionError, _theta_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_FAIL = 3

_NUMERIC_ERRORS = (PrecisionError, QuadratureError, BracketError, ArithmeticError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, Fraction):
        return _theta_text(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return float(format(v, ".17g")) if math.isfinite(v) else str(v)
    return x


class Run:
    """Output sink for one command: metadata header plus files under ``out``."""

    def __init__(self, args: argparse.Namespace, bits: Optional[int] = None):
        self.args = args
        self.out = Path(args.out)
        self.bits = bits
        self.written: List[str] = []

    @property
    def meta(self) -> Dict[str, Any]:
        flags = {k: v for k, v in sorted(vars(self.args).items())
                 if not k.startswith("_") and k not in ("func",)}
        return {
            "tool": "arcldp",
            "version": __version__,
            "command": self.args.command,
            "flags": _jsonable(flags),
            "bits": self.bits,
            "C": getattr(self.args, "C", None),
        }

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        meta = self.meta
        lines = [f"# arcldp {__version__} {meta['command']}",
                 f"# flags: {canonical_json(meta['flags'])}",
                 f"# bits: {meta['bits']}",
                 f"# C: {_fmt(meta['C']) if meta['C'] is not None else None}",
                 ",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        tmp.replace(path)
        self.written.append(str(path))
        return path

    def json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.out / name
        write_json_atomic(path, _jsonable({"meta": self.meta, **payload}))
        self.written.append(str(path))
        return path


def _cache(args) -> Optional[ResultsCache]:
    if getattr(args, "no_cache", False):
        return None
    return ResultsCache(args.cache_dir if args.cache_dir else default_cache_dir())


def _policy(args) -> PrecisionPolicy:
    if args.bits != "auto":
        return PrecisionPolicy.fixed(int(args.bits))
    return PrecisionPolicy(base_bits=args.base_bits, guard_bits=args.guard_bits)


def _theta(text) -> object:
    try:
        th = parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if not 0.0 < angle_value(th) < 2 * math.pi:
        raise argparse.ArgumentTypeError(f"theta must lie in (0, 2pi), got {text}")
    return th


def _unit_open(text) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return v


def _pos_int(text) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _float_list(text) -> List[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _int_list(text) -> List[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _bits(text) -> str:
    if text == "auto":
        return text
    if int(text) < 64:
        raise argparse.ArgumentTypeError("bits must be 'auto' or an integer >= 64")
    return str(int(text))


def _C(text) -> float:
    try:
        v = math.e if str(text).strip().lower() == "e" else float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid C: {text!r}")
    if not v > 1.0:
        raise argparse.ArgumentTypeError("C must exceed 1")
    return v


def _rate_table(theta, grid_size, args):
    from .rate import build_rate_table
    return build_rate_table(angle_value(theta), grid_size, cache=_cache(args),
                            workers=args.workers)


def _spectrum(n, theta, policy, x_max, args):
    from .spectrum import SpectrumResult, eigenvalues
    cache = _cache(args)
    params = {"n": n, "theta": str(theta), "x_max": float(x_max),
              "bits": policy.bits(n, x_max)}
    if cache is not None:
        hit = cache.get("spectrum", params)
        if hit is not None:
            return SpectrumResult.from_json(hit)
    spec = eigenvalues(n, theta, policy, x_max=x_max)
    if cache is not None:
        cache.put("spectrum", params, spec.to_json(DEFAULT_C))
    return spec


def cmd_measure(args) -> int:
    from .equilibrium import (CircleConstraint, IntervalConstraint, circle_measure,
                              frostman_residuals, potential, solve_alpha_interval)
    theta = angle_value(args.theta)
    nu = circle_measure(CircleConstraint(theta, args.q))
    rep = frostman_residuals(nu)
    run = Run(args)
    psi = np.linspace(-math.pi, math.pi, args.grid)
    run.csv("measure_density.csv", ["psi", "density", "cdf"],
            zip(psi, nu.density(psi), nu.cdf(psi)))
    run.csv("measure_potential.csv", ["psi", "potential"], zip(psi, potential(nu, psi)))
    summary = {
        "theta": theta, "q": args.q, "beta": nu.beta, "alpha": nu.alpha, "case": nu.case,
        "F1": rep.F1, "F2": rep.F2, "frostman_max_residual": rep.max_residual,
        "gap_slack": rep.gap_slack,
        "masses": list(nu.component_masses), "total_mass": nu.total_mass,
        "support": [[c.left, c.right] for c in nu.support],
    }
    if args.emit_figure1:
        betas = np.linspace(-0.95, 0.95, args.beta_grid)
        qs = np.round(np.arange(1, 10) / 10, 12)
        rows = [(b, q, solve_alpha_interval(IntervalConstraint(float(b), float(q))))
                for b in betas for q in qs]
        run.csv("figure1_alpha_beta_q.csv", ["beta", "q", "alpha"], rows)
    run.json("measure_summary.json", summary)
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_rate(args) -> int:
    t = _rate_table(args.theta, args.grid_size, args)
    run = Run(args)
    run.csv("rate_table.csv", ["q", "J", "F1", "F2"],
            zip(t.q_grid, t.J_values, t.F_constants[:, 0], t.F_constants[:, 1]))
    q_free = angle_value(args.theta) / (2 * math.pi)
    summary = {"theta": t.theta, "J_at_free_mass": float(t.J(q_free)), "q_free": q_free,
               "J0": t.endpoint_extensions["J0"], "J1": t.endpoint_extensions["J1"],
               "c0": t.endpoint_extensions["dJ1"], "knots": len(t.q_grid)}
    run.json("rate_summary.json", summary)
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_lambda(args) -> int:
    from .rate import lambda_transform
    L = lambda_transform(_rate_table(args.theta, args.grid_size, args))
    rows = [(lam, L(lam), L.argmax(lam)) for lam in args.lambdas]
    run = Run(args)
    run.csv("lambda.csv", ["lambda", "Lambda", "argmax_y"], rows)
    summary = {"theta": L.theta, "c0": L.c0,
               "values": [{"lambda": a, "Lambda": b, "argmax_y": c} for a, b, c in rows]}
    run.json("lambda_summary.json", summary)
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    policy = _policy(args)
    spec = _spectrum(args.n, args.theta, policy, args.x_max, args)
    run = Run(args, bits=spec.bits_used)
    lam = spec.exponents(args.C)
    digits = int(spec.bits_used * math.log10(2)) + 1
    import mpmath
    run.csv("spectrum.csv", ["j", "p_j", "lambda_j"],
            [(j + 1, mpmath.nstr(p, digits, strip_zeros=False), _fmt(float(l)))
             for j, (p, l) in enumerate(zip(spec.eigenvalues, lam))])
    payload = spec.to_json(args.C)
    run.json("spectrum.json", payload)
    print(json.dumps({"n": spec.n, "bits": spec.bits_used,
                      "largest": float(spec.eigenvalues[0]),
                      "smallest": float(spec.eigenvalues[-1])}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .ldp import verify_main
    from .rate import lambda_transform
    L = lambda_transform(_rate_table(args.theta, args.grid_size, args))
    report = verify_main(args.theta, args.lam, args.eps, args.ladder, args.C,
                         _policy(args), lambda_fn=L, workers=args.workers)
    run = Run(args, bits=max(r.bits for r in report.rows))
    run.csv("verify.csv", ["n", "A_n", "T", "residual"], report.csv_rows())
    payload = report.to_json()
    run.json("verify_report.json", payload)
    print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_oracle(args) -> int:
    from .equilibrium import CircleConstraint, circle_measure
    from .oracle import compare_to_analytic, minimize_constrained, oracle_table
    from .rate import rate_J
    theta = angle_value(args.theta)
    res = minimize_constrained(args.m, theta, args.q, iters=args.iters)
    nu = circle_measure(CircleConstraint(theta, args.q))
    J = rate_J(theta, args.q)
    run = Run(args)
    run.csv("oracle_weights.csv", ["node", "weight", "density"], oracle_table(res, nu))
    summary = {"theta": theta, "q": args.q, "m": args.m, "energy": res.energy, "J": J,
               "energy_minus_J": res.energy - J,
               "cdf_distance": compare_to_analytic(res.grid, nu),
               "iterations": res.iterations, "flag": res.flag,
               "gradient_map_norm": res.gradient_map_norm, "step_rule": res.step_rule}
    run.json("oracle_summary.json", summary)
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_sample(args) -> int:
    from .ldp import sample_counts
    policy = _policy(args)
    spec = _spectrum(args.n, args.theta, policy, 1.0, args)
    st = sample_counts(args.n, args.theta, args.reps, args.seed, spec=spec,
                       workers=args.workers)
    run = Run(args, bits=spec.bits_used)
    run.csv("sample_histogram.csv", ["k", "frequency"], st.csv_rows())
    payload = st.to_json()
    run.json("sample_stats.json", payload)
    print(json.dumps(_jsonable({k: v for k, v in payload.items() if k != "histogram"}),
                     indent=2, sort_keys=True))
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta", type=_theta, default="pi",
                   help="arc length: radians or a token such as pi, pi/2, 2pi/3 (default pi)")
    p.add_argument("--C", type=_C, default=DEFAULT_C,
                   help="counting constant C > 1, a number or e (default e)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="preferred table format; JSON summaries are always written")
    p.add_argument("--cache-dir", default=None,
                   help="results cache directory (default $ARC_LDP_CACHE or ~/.cache/arcldp)")
    p.add_argument("--no-cache", action="store_true", help="bypass the results cache")
    p.add_argument("--bits", type=_bits, default="auto",
                   help="working precision in bits, or auto (default auto)")
    p.add_argument("--base-bits", type=int, default=128, help="minimum bits under auto (128)")
    p.add_argument("--guard-bits", type=int, default=64, help="guard bits under auto (64)")
    p.add_argument("--workers", type=_pos_int, default=1, help="worker processes (default 1)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--config", default=None, help="key=value file overriding defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arcldp",
                     description="Constrained equilibrium measures, rate function and "
                                 "arc-restricted sine-kernel spectrum for unitary "
                                 "eigenvalue counts.")
    parser.add_argument("--version", action="version", version=f"arcldp {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("measure", help="solve the constrained equilibrium problem")
    _common(p)
    p.add_argument("--q", type=_unit_open, required=True, help="mass on the arc, in (0, 1)")
    p.add_argument("--grid", type=_pos_int, default=1001, help="angles in the tables (1001)")
    p.add_argument("--emit-figure1", action="store_true",
                   help="also write the (beta, q, alpha) relationship table")
    p.add_argument("--beta-grid", type=_pos_int, default=21,
                   help="beta values for the relationship table (21)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("rate", help="tabulate the rate function J")
    _common(p)
    p.add_argument("--grid-size", type=int, default=41, help="Chebyshev knots (41)")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("lambda", help="Legendre transform of J")
    _common(p)
    p.add_argument("--lambda", dest="lambdas", type=_float_list, default="0.5,1,2",
                   help="comma-separated lambda values (0.5,1,2)")
    p.add_argument("--grid-size", type=int, default=41, help="Chebyshev knots (41)")
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("spectrum", help="certified kernel eigenvalues")
    _common(p)
    p.add_argument("--n", type=_pos_int, required=True, help="matrix size")
    p.add_argument("--x-max", type=float, default=3.0,
                   help="resolve eigenvalues down to exp(-x_max n) (3)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="window-average ladder check")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="lambda (1)")
    p.add_argument("--eps", type=float, default=0.25, help="half window (0.25)")
    p.add_argument("--ladder", type=_int_list, default="16,32,64", help="n values (16,32,64)")
    p.add_argument("--grid-size", type=int, default=41, help="Chebyshev knots (41)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="discrete energy minimisation cross-check")
    _common(p)
    p.add_argument("--q", type=_unit_open, required=True, help="mass on the arc, in (0, 1)")
    p.add_argument("--m", type=int, default=800, help="grid nodes (800)")
    p.add_argument("--iters", type=_pos_int, default=5000, help="iteration budget (5000)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sample", help="Monte Carlo counts from the Bernoulli representation")
    _common(p)
    p.add_argument("--n", type=_pos_int, required=True, help="matrix size")
    p.add_argument("--reps", type=_pos_int, default=100_000, help="draws (100000)")
    p.set_defaults(func=cmd_sample)
    return parser


def _read_config(path) -> Dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _apply_config(parser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = _read_config(known.config)
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subs.choices.values():
        dests = {a.dest: a for a in sp._actions}
        defaults = {}
        for k, v in cfg.items():
            if k not in dests:
                continue
            if isinstance(dests[k], argparse._StoreTrueAction):
                defaults[k] = v.lower() in ("1", "true", "yes", "on")
            else:
                defaults[k] = v
        for k in cfg:
            if all(k not in {a.dest for a in s._actions} for s in subs.choices.values()):
                raise UsageError(f"unknown config key: {k}")
        sp.set_defaults(**defaults)
        for a in sp._actions:
            if a.dest in defaults and a.required:
                a.required = False


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (UsageError, OSError) as exc:
        print(f"arcldp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    # values coming from a config file bypass argparse type checks on non-strings
    for name, conv in (("theta", _theta), ("q", _unit_open)):
        if isinstance(getattr(args, name, None), str):
            try:
                setattr(args, name, conv(getattr(args, name)))
            except argparse.ArgumentTypeError as exc:
                print(f"arcldp: error: {exc}", file=sys.stderr)
                return EXIT_USAGE
    if getattr(args, "q", 1) is None:
        print("arcldp: error: --q is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"arcldp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"arcldp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"arcldp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
