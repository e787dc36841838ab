"""Command line entry point.

Exit codes: 0 analysis done (an arbitrage is a result, not a failure),
1 usage, 2 invalid model, 3 an identity that must hold failed (a bug).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .arbitrage import (
    InstanceTooLarge,
    brute_force_na,
    demonstrate_after_arbitrage,
    demonstrate_before_arbitrage,
    na_check,
    na_check_lp,
    random_adapted,
    random_instance,
    random_martingale,
    validate_after_theorem,
    validate_before_theorem,
    validate_reverse_after,
    validate_reverse_before,
)
from .errors import InvariantBreach, ModelError
from .filtered_space import format_fraction, gains
from .model_io import parse_model
from .random_time import after_part, azema_supermartingales, is_honest, progressive_enlargement, stop_at
from .report import AnalyzeOptions, render_report, run_analyze, run_examples
from .transfer import (
    deflator_after,
    deflator_before,
    measure_change_after,
    measure_change_before,
    per_period_density_after,
    per_period_density_before,
    qe_measures,
)

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_BREACH = 0, 1, 2, 3
FORMAT_ENV = "TAUARB_FORMAT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_format():
    fmt = os.environ.get(FORMAT_ENV, "text")
    return fmt if fmt in ("text", "json") else "text"


def _emit(payload, fmt, out):
    if fmt == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
        return
    for key, value in payload.items():
        if isinstance(value, list):
            value = " ".join(str(v) for v in value)
        out.write(f"{key}: {value}\n")


def _row(values):
    return [format_fraction(v) for v in values]


def _model_bits(args):
    model = parse_model(args.file)

    def pick(mapping, name, kind):
        if name is None:
            if not mapping:
                raise ModelError(f"model has no {kind}")
            return next(iter(mapping.values()))
        if name not in mapping:
            raise ModelError(f"no {kind} named {name!r}")
        return mapping[name]

    S = pick(model.processes, getattr(args, "process", None), "process") if hasattr(args, "process") else None
    tau = pick(model.random_times, getattr(args, "time", None), "random time")
    return model, S, tau


def _traded(model, S, tau, part, filtration):
    F = model.filtration
    G = progressive_enlargement(F, tau)
    target = G if filtration == "G" else F
    if part == "whole":
        return target, S.under(target)
    if part == "stopped":
        return target, stop_at(S.under(F), tau, target)
    return target, after_part(S.under(F), tau, target)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_analyze(args, out):
    model = parse_model(args.file)
    before, after = args.before, args.after
    if not before and not after:
        before = after = True
    report = run_analyze(model, AnalyzeOptions(args.process, args.time, before, after))
    out.write(render_report(report, args.format).decode("utf-8"))


def _verdict_payload(verdict, X):
    payload = {"holds": verdict.holds}
    if verdict.holds:
        if verdict.emm is not None:
            payload["emm"] = _row(verdict.emm.terminal)
    else:
        n, atom, sign = verdict.witness
        payload["witness"] = {"time": n, "atom": [o for o in X.filtration.outcomes if o in atom],
                              "sign": str(sign)}
        payload["strategy"] = [_row(verdict.strategy.at(k)) for k in range(1, X.horizon + 1)]
        payload["gains"] = _row(gains(verdict.strategy, X))
    return payload


def cmd_na_check(args, out):
    model, S, tau = _model_bits(args)
    target, X = _traded(model, S, tau, args.part, args.filtration)
    method = {"sign": na_check, "lp": na_check_lp, "brute": brute_force_na}[args.method]
    verdict = method(model.space, target, X)
    _emit(_verdict_payload(verdict, X.under(target)), args.format, out)


def cmd_find_arbitrage(args, out):
    model, S, tau = _model_bits(args)
    target, X = _traded(model, S, tau, args.part, args.filtration)
    verdict = na_check(model.space, target, X)
    payload = _verdict_payload(verdict, X.under(target))
    if verdict.holds:
        payload = {"holds": True, "arbitrage": "none"}
    _emit(payload, args.format, out)


def cmd_deflator(args, out):
    model, _, tau = _model_bits(args)
    azema = azema_supermartingales(model.space, model.filtration, tau)
    build = deflator_after if args.after else deflator_before
    rep = build(model.space, azema, tau)
    payload = {"side": "after" if args.after else "before",
               "one_plus_jumps_positive": rep.one_plus_jumps_positive,
               "g_martingale": rep.martingale_verified}
    for n in range(rep.deflator.horizon + 1):
        payload[f"N_{n}"] = _row(rep.deflator.at(n))
    for n in range(rep.exponential.horizon + 1):
        payload[f"E(N)_{n}"] = _row(rep.exponential.at(n))
    _emit(payload, args.format, out)


def cmd_measure(args, out):
    model, _, tau = _model_bits(args)
    space, F = model.space, model.filtration
    azema = azema_supermartingales(space, F, tau)
    which = args.which
    if which in ("q", "qa"):
        rep = (measure_change_before if which == "q" else measure_change_after)(space, azema)
        payload = {"which": which, "density": _row(rep.terminal.terminal), "equals_base": rep.equals_base}
        for n in range(1, rep.increments.horizon + 1):
            payload[f"dY_{n}"] = _row(rep.increments.increment(n))
    elif which in ("qe", "qe-tilde"):
        qe, qt = qe_measures(space, azema)
        payload = {"which": which, "density": _row((qe if which == "qe" else qt).terminal)}
    else:
        build = per_period_density_before if which == "pp" else per_period_density_after
        payload = {"which": which, "density": _row(build(space, azema, tau).terminal)}
    _emit(payload, args.format, out)


def cmd_validate(args, out):
    model, _, tau = _model_bits(args)
    space, F = model.space, model.filtration
    payload = {"before": validate_before_theorem(space, F, tau, strict=True).as_dict()}
    if is_honest(F, tau):
        payload["after"] = validate_after_theorem(space, F, tau, strict=True).as_dict()
    else:
        payload["after"] = {"skipped": "tau is not honest"}
    out.write(json.dumps(payload, indent=2, default=str) + "\n" if args.format == "json"
              else "".join(f"{k}: {v}\n" for k, v in payload.items()))


def fuzz(seed, count, max_outcomes, max_horizon, side="both"):
    """Run the property campaign; returns counters, raising InvariantBreach on the first failure."""
    stats = {"instances": 0, "before_checked": 0, "after_checked": 0, "oracle_checked": 0,
             "negative_before": 0, "negative_after": 0}
    for k in range(count):
        s = seed + k
        if side in ("before", "both"):
            space, F, tau = random_instance(s, max_outcomes, max_horizon)
            rep = validate_before_theorem(space, F, tau, strict=True)
            validate_reverse_before(space, F, tau, random_martingale(space, F, s), strict=True)
            if not rep.b:
                demonstrate_before_arbitrage(space, F, tau)
                stats["negative_before"] += 1
            X = random_adapted(space, F, s)
            verdicts = [na_check(space, F, X).holds, na_check_lp(space, F, X).holds]
            try:
                verdicts.append(brute_force_na(space, F, X).holds)
            except InstanceTooLarge:
                pass
            if len(set(verdicts)) != 1:
                raise InvariantBreach(f"seed {s}: NA deciders disagree {verdicts}")
            stats["oracle_checked"] += 1
            stats["before_checked"] += 1
        if side in ("after", "both"):
            space, F, tau = random_instance(s, max_outcomes, max_horizon, honest=True)
            rep = validate_after_theorem(space, F, tau)
            if not rep.consistent:
                raise InvariantBreach(f"seed {s}: after-time conditions disagree {rep.as_dict()}")
            validate_reverse_after(space, F, tau, random_martingale(space, F, s), strict=True)
            if not rep.b:
                demonstrate_after_arbitrage(space, F, tau)
                stats["negative_after"] += 1
            stats["after_checked"] += 1
        stats["instances"] += 1
    return stats


def cmd_fuzz(args, out):
    if args.count < 0 or args.max_outcomes < 2 or args.max_horizon < 1:
        raise UsageError("need --count >= 0, --max-outcomes >= 2, --max-horizon >= 1")
    stats = fuzz(args.seed, args.count, args.max_outcomes, args.max_horizon, args.side)
    _emit(stats, args.format, out)


def cmd_examples(args, out):
    if args.id not in (1, 2):
        raise UsageError(f"--id must be 1 or 2, got {args.id}")
    report = run_examples(args.id, args.u, args.d, args.lam, args.s0)
    out.write(render_report(report, args.format).decode("utf-8"))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = _default_format()
    parser = _Parser(prog="tauarb", description="Arbitrage before and after a random time, in exact arithmetic.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, process=True):
        p.add_argument("file", help="JSON model file")
        if process:
            p.add_argument("--process", help="process name (default: first)")
        p.add_argument("--time", help="random time name (default: first)")
        p.add_argument("--format", choices=("text", "json"), default=fmt)

    p = sub.add_parser("analyze", help="full report")
    common(p)
    p.add_argument("--before", action="store_true", help="only the stopped market")
    p.add_argument("--after", action="store_true", help="only the post-time market")
    p.set_defaults(func=cmd_analyze)

    for name, func, text in (("na-check", cmd_na_check, "no-arbitrage verdict for one market"),
                             ("find-arbitrage", cmd_find_arbitrage, "print an arbitrage strategy if one exists")):
        p = sub.add_parser(name, help=text)
        common(p)
        p.add_argument("--part", choices=("whole", "stopped", "after"), default="stopped")
        p.add_argument("--filtration", choices=("F", "G"), default="G")
        if name == "na-check":
            p.add_argument("--method", choices=("sign", "lp", "brute"), default="sign")
        p.set_defaults(func=func)

    p = sub.add_parser("deflator", help="deflator for the stopped or post-time market")
    common(p, process=False)
    p.add_argument("--after", action="store_true", help="post-time deflator (honest times)")
    p.set_defaults(func=cmd_deflator)

    p = sub.add_parser("measure", help="density of a derived probability measure")
    common(p, process=False)
    p.add_argument("--which", choices=("q", "qa", "qe", "qe-tilde", "pp", "pp-after"), default="q")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("validate-theorems", help="check the equivalent conditions agree (exit 3 if not)")
    common(p, process=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fuzz", help="check the conditions on seeded random models")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-outcomes", type=int, default=8)
    p.add_argument("--max-horizon", type=int, default=4)
    p.add_argument("--side", choices=("before", "after", "both"), default="both")
    p.add_argument("--format", choices=("text", "json"), default=fmt)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("examples", help="reproduce the two binomial examples")
    p.add_argument("--id", type=int, required=True)
    p.add_argument("--u", default="2")
    p.add_argument("--d", default="1/2")
    p.add_argument("--lambda", dest="lam", default="1/2")
    p.add_argument("--s0", default="1")
    p.add_argument("--format", choices=("text", "json"), default=fmt)
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, out)
    except UsageError as exc:
        print(f"tauarb: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantBreach as exc:
        print(f"tauarb: invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except (ModelError, ValueError) as exc:
        print(f"tauarb: invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
