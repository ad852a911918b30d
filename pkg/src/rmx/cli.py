"""Command line entry point ``rmx``."""

from __future__ import annotations

import argparse
import json
import sys

from .channels import ChannelError, ConstantFamily, SymmetricChannel, interpolate
from .gexit import GridTooCoarse
from .harness import (PROFILES, SUITES, HarnessError, RunConfig, derive_seed, parse_channel_spec,
                      parse_code_spec, run_experiment, run_verify)
from .inference import BitProblem, BudgetExceeded, extrinsic, mc_expect, moment_norm
from .rm_code import CodeError, build_code, nesting_sets

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _global_flags(p: argparse.ArgumentParser, defaults: bool) -> None:
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(0), help="root seed (64 bit)")
    p.add_argument("--threads", type=int, default=d(1), help="worker processes")
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    p.add_argument("--out", default=d(None), help="output file or directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmx", description="Exact checks of Reed-Muller bit-error bounds.")
    _global_flags(parser, True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, False)
    sub = parser.add_subparsers(dest="command", required=True)

    code = sub.add_parser("code", help="code parameters and nesting sets")
    code_sub = code.add_subparsers(dest="code_command", required=True)
    info = code_sub.add_parser("info", parents=[common], help="length, dimension and rate of RM(r,m)")
    info.add_argument("--r", type=int, required=True)
    info.add_argument("--m", type=int, required=True)
    nest = code_sub.add_parser("nest", parents=[common], help="nesting sets of RM(r,m) in RM(r,m+k)")
    for name in ("r", "m", "k", "i"):
        nest.add_argument(f"--{name}", type=int, required=True)

    curves = sub.add_parser("curves", parents=[common], help="curve CSV, plot and bound reports")
    curves.add_argument("--config", help="key = value file; flags override it")
    curves.add_argument("--code", help="R,M")
    curves.add_argument("--channel", help="channel or family spec")
    curves.add_argument("--grid", type=int)
    curves.add_argument("--bit", type=int)
    curves.add_argument("--samples", type=int)
    curves.add_argument("--tol-profile", choices=sorted(PROFILES))
    curves.add_argument("--no-plot", action="store_true", help="skip the PNG")

    for name, hlp in (("infer", "MMSE of one bit, exact when it fits"), ("mc", "Monte Carlo MMSE of one bit")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--code", required=True, help="R,M")
        p.add_argument("--channel", required=True, help="channel or family spec")
        p.add_argument("--t", type=float, default=0.0, help="family parameter (ignored for a plain channel)")
        p.add_argument("--bit", type=int, default=0)
        p.add_argument("--extrinsic", action="store_true", help="leave the bit's own output out")
        p.add_argument("--samples", type=int, default=10 ** 6 if name == "mc" else None)

    verify = sub.add_parser("verify", parents=[common], help="run verification suites")
    verify.add_argument("--suite", default="all", choices=SUITES + ("all",))
    verify.add_argument("--tol-profile", default="default", choices=sorted(PROFILES))
    return parser


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _cmd_code(args) -> int:
    if args.code_command == "info":
        c = build_code(args.r, args.m)
        _emit(args, {"N": c.N, "K": c.K, "rate": str(c.rate), "rate_float": float(c.rate)},
              f"N = {c.N}\nK = {c.K}\nrate = {c.rate} ({float(c.rate)!r})")
        return EXIT_PASS
    ns = nesting_sets(args.r, args.m, args.k, args.i)
    sets = {"I": ns.I, "I'": ns.I_prime, "A": ns.A, "B": ns.B, "C": ns.C}
    _emit(args, {k: list(v) for k, v in sets.items()},
          "\n".join(f"{k} = {list(v)}" for k, v in sets.items()))
    return EXIT_PASS


def _table(record) -> str:
    width = max([len(r["name"]) for r in record.reports] + [4])
    lines = [f"{'check':{width}s}  {'max violation':>14s}  {'tolerance':>9s}  result"]
    for r in record.reports:
        lines.append(f"{r['name']:{width}s}  {r['max_violation']:14.3e}  {r['tolerance']:9.1e}  "
                     f"{'pass' if r['pass'] else 'FAIL'}")
    lines.append("")
    lines += [f"suite {s}: {'pass' if ok else 'FAIL'}" for s, ok in record.suites.items()]
    return "\n".join(lines)


def _cmd_curves(args) -> int:
    overrides = {"samples": args.samples, "tol_profile": args.tol_profile, "seed": getattr(args, "seed", None),
                 "grid": args.grid, "bit": args.bit, "channel": args.channel, "out": args.out}
    if args.code:
        overrides["r"], overrides["m"] = parse_code_spec(args.code)
    text = ""
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise HarnessError(f"cannot read config: {exc}") from exc
    config = RunConfig.parse(text, overrides)
    record = run_experiment(config, plot=not args.no_plot)
    if args.json:
        print(record.to_json(timing=True), end="")
    else:
        print(_table(record))
        print(f"wrote {', '.join(record.paths.values())}")
    return EXIT_PASS if record.passed else EXIT_FAIL


def _setup(args):
    r, m = parse_code_spec(args.code)
    code = build_code(r, m)
    obj = parse_channel_spec(args.channel)
    family = ConstantFamily(obj) if isinstance(obj, SymmetricChannel) else obj
    if not 0 <= args.bit < code.N:
        raise HarnessError(f"bit {args.bit} out of range for N={code.N}")
    if not 0.0 <= args.t <= 1.0:
        raise HarnessError(f"t = {args.t} outside [0, 1]")
    S = extrinsic(code, args.bit) if args.extrinsic else list(range(code.N))
    return code, family, S


def _print_estimate(args, value: float, stderr: float, method: str) -> None:
    text = f"{value!r}" if method == "exact" else f"{value!r} +- {stderr!r}"
    _emit(args, {"value": value, "stderr": stderr, "method": method}, text)


def _cmd_infer(args) -> int:
    code, family, S = _setup(args)
    seed = derive_seed(args.seed, "infer")
    est = moment_norm(code, family, args.t, args.bit, S, 2, samples=args.samples, seed=seed)
    _print_estimate(args, 1.0 - est.value, est.stderr, est.method)
    return EXIT_PASS


def _cmd_mc(args) -> int:
    code, family, S = _setup(args)
    if not args.samples or args.samples < 2:
        raise HarnessError("need at least 2 samples")
    est = mc_expect(BitProblem(code, args.bit, S), family.channel_at(args.t), lambda f: 1.0 - f * f,
                    args.samples, derive_seed(args.seed, "mc"))
    _print_estimate(args, est.value, est.stderr, "mc")
    return EXIT_PASS


def _cmd_verify(args) -> int:
    record = run_verify(args.suite, args.tol_profile, args.seed, max(1, args.threads))
    text = record.to_json(timing=True)
    if args.out:
        from pathlib import Path

        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    if args.json:
        print(text, end="")
    else:
        print(_table(record))
        print(f"wall time {record.wall_time:.1f} s")
    return EXIT_PASS if record.passed else EXIT_FAIL


COMMANDS = {"code": _cmd_code, "curves": _cmd_curves, "infer": _cmd_infer, "mc": _cmd_mc, "verify": _cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (HarnessError, CodeError, ChannelError, GridTooCoarse, BudgetExceeded, OSError) as exc:
        print(f"rmx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
