"""Full analyses of a model, rendered as text tables or JSON.

A report holds only JSON-ready values (strings, booleans, lists, dicts), so the
JSON rendering round-trips exactly and identical inputs give identical bytes.
Rationals are printed in lowest terms, ``+inf`` marks an empty hitting time.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import asdict, dataclass, fields

from .arbitrage import (
    NAVerdict,
    na_check,
    validate_after_theorem,
    validate_before_theorem,
)
from .errors import InvariantBreach, ModelError, NotAdaptedError
from .filtered_space import AdaptedProcess, Filtration, format_fraction, gains, is_martingale
from .model_io import Model
from .random_time import (
    after_part,
    azema_supermartingales,
    format_time,
    is_honest,
    m_A_decomposition,
    one_hitting_times,
    progressive_enlargement,
    stop_at,
    zero_hitting_times,
)
from .transfer import (
    deflator_after,
    deflator_before,
    g_compensated_after,
    g_compensated_before,
    main_theorem_after,
    main_theorem_before,
    measure_change_after,
    measure_change_before,
    per_period_density_after,
    per_period_density_before,
    qe_measures,
)


@dataclass(frozen=True)
class AnalysisReport:
    model: dict
    azema: dict
    hitting_times: dict
    honesty: dict
    equivalence: dict
    verdicts: list
    deflators: dict
    measures: dict
    compensated: dict
    transfer: dict
    gap_sets: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "AnalysisReport":
        names = [f.name for f in fields(cls)]
        missing = [n for n in names if n not in doc]
        if missing:
            raise ValueError(f"report is missing {missing}")
        return cls(**{n: doc[n] for n in names})


@dataclass(frozen=True)
class AnalyzeOptions:
    process: str | None = None
    time: str | None = None
    before: bool = True
    after: bool = True


# ---------------------------------------------------------------------------
# small renderers for JSON-ready values
# ---------------------------------------------------------------------------


def _row(values) -> list:
    return [format_fraction(v) for v in values]


def _table(process: AdaptedProcess) -> list:
    return [_row(process.at(n)) for n in range(process.horizon + 1)]


def _times(ext) -> list:
    return [format_time(v) for v in ext.values]


def _atom(filtration: Filtration, names) -> list:
    return [o for o in filtration.outcomes if o in names]


def _verdict(label, space, filtration, fname, build) -> dict:
    entry = {"label": label, "filtration": fname}
    try:
        X = build()
    except NotAdaptedError:
        entry.update(adapted=False, holds=None)
        return entry
    verdict: NAVerdict = na_check(space, filtration, X)
    entry.update(adapted=True, holds=verdict.holds)
    if verdict.holds:
        entry["emm"] = _row(verdict.emm.terminal)
        return entry
    payoff = gains(verdict.strategy, X.under(filtration))
    # replay before emission: an arbitrage must never lose and must win somewhere
    if any(g < 0 for g in payoff) or not any(g > 0 for g in payoff):
        raise InvariantBreach(f"strategy for {label} under {fname} does not replay as an arbitrage")
    n, names, sign = verdict.witness
    entry["witness"] = {"time": n, "atom": _atom(filtration, names), "sign": sign}
    entry["strategy"] = [_row(verdict.strategy.at(k)) for k in range(1, filtration.horizon + 1)]
    entry["gains"] = _row(payoff)
    return entry


def _pick(mapping: dict, name, kind):
    if not mapping:
        raise ModelError(f"model has no {kind}")
    if name is None:
        return next(iter(mapping.values()))
    if name not in mapping:
        raise ModelError(f"no {kind} named {name!r}; have {sorted(mapping)}")
    return mapping[name]


def _gap_sets(space, S, azema) -> dict:
    """Outcomes where S moves at n while Ztilde_n hits a level that Z_{n-1} had not."""
    Z, Zt = azema.Z, azema.Ztilde
    out = {"before": [], "after": []}
    for n in range(1, S.horizon + 1):
        step = S.increment(n)
        zero = [o for o, d, zt, zp in zip(space.outcomes, step, Zt.at(n), Z.at(n - 1)) if d != 0 and zt == 0 and zp > 0]
        one = [o for o, d, zt, zp in zip(space.outcomes, step, Zt.at(n), Z.at(n - 1)) if d != 0 and zt == 1 and zp < 1]
        out["before"].append({"time": n, "outcomes": zero})
        out["after"].append({"time": n, "outcomes": one})
    return out


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------


def run_analyze(model: Model, options: AnalyzeOptions = AnalyzeOptions()) -> AnalysisReport:
    space, F = model.space, model.filtration
    S = _pick(model.processes, options.process, "process")
    tau = _pick(model.random_times, options.time, "random time")
    G = progressive_enlargement(F, tau)
    azema = azema_supermartingales(space, F, tau)
    m, A = m_A_decomposition(space, F, tau)
    R1, R2, R3 = zero_hitting_times(azema)
    s1, s2, s3 = one_hitting_times(azema)
    honest = is_honest(F, tau)
    do_after = options.after and honest.holds

    equivalence = {}
    if options.before:
        equivalence["before"] = validate_before_theorem(space, F, tau).as_dict()
    if options.after:
        equivalence["after"] = validate_after_theorem(space, F, tau).as_dict() if honest else {"skipped": "tau is not honest"}

    tn = tau.name
    verdicts = []
    for fname, filt in (("F", F), ("G", G)):
        verdicts.append(_verdict(S.name, space, filt, fname, lambda filt=filt: S.under(filt)))
        if options.before:
            verdicts.append(_verdict(f"{S.name}^{tn}", space, filt, fname,
                                     lambda filt=filt: stop_at(S.under(F), tau, filt)))
        if options.after:
            verdicts.append(_verdict(f"{S.name}-{S.name}^{tn}", space, filt, fname,
                                     lambda filt=filt: after_part(S.under(F), tau, filt)))

    def deflator_summary(report):
        return {"N": _table(report.deflator), "exponential": _table(report.exponential),
                "one_plus_jumps_positive": report.one_plus_jumps_positive,
                "g_martingale": report.martingale_verified}

    def measure_summary(report):
        return {"Y": _table(report.increments), "density": _row(report.terminal.terminal),
                "equals_base": report.equals_base, "f_martingale": report.martingale_verified}

    deflators, measures, compensated, transfer = {}, {}, {}, {}
    qe, qe_tilde = qe_measures(space, azema)
    measures["qe"] = _row(qe.terminal)
    measures["qe_tilde"] = _row(qe_tilde.terminal)
    is_mart = bool(is_martingale(space, F, S))
    if options.before:
        deflators["before"] = deflator_summary(deflator_before(space, azema, tau))
        measures["q"] = measure_summary(measure_change_before(space, azema))
        measures["per_period"] = _row(per_period_density_before(space, azema, tau).terminal)
        if is_mart:
            compensated["before"] = _table(g_compensated_before(space, S, azema, tau))
            transfer["before"] = asdict(main_theorem_before(space, azema, tau, S))
    if do_after:
        deflators["after"] = deflator_summary(deflator_after(space, azema, tau))
        measures["qa"] = measure_summary(measure_change_after(space, azema))
        measures["per_period_after"] = _row(per_period_density_after(space, azema, tau).terminal)
        if is_mart:
            compensated["after"] = _table(g_compensated_after(space, S, azema, tau))
            transfer["after"] = asdict(main_theorem_after(space, azema, tau, S))
    if "before" in compensated and "after" in compensated:
        rows = [[format_fraction(sum(map(_parse, pair))) for pair in zip(a, b)]
                for a, b in zip(compensated["before"], compensated["after"])]
        compensated["sum"] = rows
    if not is_mart:
        compensated["note"] = f"{S.name} is not an F-martingale"

    return AnalysisReport(
        model={"source": model.source, "outcomes": list(space.outcomes), "probabilities": _row(space.weights),
               "horizon": space.horizon, "process": S.name, "random_time": tn,
               "tau": list(tau.values), "is_f_martingale": is_mart},
        azema={"Z": _table(azema.Z), "Ztilde": _table(azema.Ztilde), "m": _table(m), "A": _table(A)},
        hitting_times={"R1": _times(R1), "R2": _times(R2), "R3": _times(R3),
                       "s1": _times(s1), "s2": _times(s2), "s3": _times(s3)},
        honesty={"holds": honest.holds,
                 "counterexample": None if honest else {
                     "time": honest.counterexample[0],
                     "atom": _atom(F, honest.counterexample[1]),
                     "values": list(honest.counterexample[2])}},
        equivalence=equivalence,
        verdicts=verdicts,
        deflators=deflators,
        measures=measures,
        compensated=compensated,
        transfer=transfer,
        gap_sets=_gap_sets(space, S.under(F), azema),
    )


def _parse(text):
    from fractions import Fraction

    return Fraction(text)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _grid(title, outcomes, rows, first="n") -> list:
    header = [first] + list(outcomes)
    body = [[str(k)] + list(r) for k, r in enumerate(rows)]
    widths = [max(len(line[c]) for line in [header] + body) for c in range(len(header))]
    fmt = lambda line: "  ".join(cell.rjust(w) for cell, w in zip(line, widths))  # noqa: E731
    return [title, fmt(header)] + [fmt(line) for line in body] + [""]


def _render_text(r: AnalysisReport) -> str:
    o = r.model["outcomes"]
    lines = [f"model {r.model['source']}: process {r.model['process']}, random time {r.model['random_time']}, "
             f"horizon {r.model['horizon']}",
             "P      " + "  ".join(f"{a}={p}" for a, p in zip(o, r.model["probabilities"])),
             "tau    " + "  ".join(f"{a}={t}" for a, t in zip(o, r.model["tau"])), ""]
    for key in ("Z", "Ztilde", "m", "A"):
        lines += _grid(key, o, r.azema[key])
    lines.append("hitting times")
    for key, vals in r.hitting_times.items():
        lines.append(f"  {key:<3}" + "  ".join(f"{a}={v}" for a, v in zip(o, vals)))
    lines.append("")
    lines.append(f"honest: {'yes' if r.honesty['holds'] else 'no'}")
    if r.honesty["counterexample"]:
        c = r.honesty["counterexample"]
        lines.append(f"  tau takes {c['values']} on atom {c['atom']} before time {c['time']}")
    lines.append("")
    for side, rep in r.equivalence.items():
        if "skipped" in rep:
            lines.append(f"conditions {side}: skipped ({rep['skipped']})")
        else:
            flags = " ".join(f"({k})={'T' if rep[k] else 'F'}" for k in "bcde")
            lines.append(f"conditions {side}: {flags} consistent={'yes' if rep['consistent'] else 'NO'}")
    lines.append("")
    lines.append("no-arbitrage verdicts")
    for v in r.verdicts:
        head = f"  {v['label']:<10} under {v['filtration']}: "
        if not v["adapted"]:
            lines.append(head + "not adapted")
        elif v["holds"]:
            lines.append(head + "NA holds, EMM density " + " ".join(v["emm"]))
        else:
            w = v["witness"]
            lines.append(head + f"arbitrage, witness time {w['time']} atom {w['atom']} sign {w['sign']:+d}")
            for n, row in enumerate(v["strategy"], start=1):
                lines.append(f"      H_{n} = " + " ".join(row))
            lines.append("      gains = " + " ".join(v["gains"]))
    lines.append("")
    for side, d in r.deflators.items():
        lines += _grid(f"deflator {side} (1+jumps>0: {d['one_plus_jumps_positive']}, "
                       f"G-martingale: {d['g_martingale']})", o, d["N"])
    for key, val in r.measures.items():
        if isinstance(val, dict):
            lines.append(f"measure {key}: density " + " ".join(val["density"]) +
                         f" (equals P: {val['equals_base']})")
        else:
            lines.append(f"measure {key}: density " + " ".join(val))
    lines.append("")
    for key, val in r.compensated.items():
        if key == "note":
            lines.append(val)
        else:
            lines += _grid(f"G-compensated {key}", o, val)
    for side, t in r.transfer.items():
        lines.append(f"transfer {side}: " + " ".join(f"{k}={'T' if v else 'F'}" for k, v in t.items()))
    lines.append("")
    for side, entries in r.gap_sets.items():
        lines.append(f"gap set {side}: " + "; ".join(f"n={e['time']}: {e['outcomes']}" for e in entries))
    return "\n".join(lines).rstrip() + "\n"


def render_report(report: AnalysisReport, fmt: str = "text") -> bytes:
    if fmt == "text":
        return _render_text(report).encode("utf-8")
    if fmt in ("json", "structured"):
        return (json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(data: bytes) -> AnalysisReport:
    return AnalysisReport.from_dict(json.loads(data.decode("utf-8")))


# ---------------------------------------------------------------------------
# bundled worked examples
# ---------------------------------------------------------------------------


def model_from_binomial(bm, source) -> Model:
    return Model(bm.space, bm.F, {"S": bm.S}, {"tau": bm.tau}, source)


def _expected_first(p, u, d, s0):
    f = format_fraction
    one, zero = "1", "0"
    return {
        "azema.Z": [[one] * 4, [one, one, f(1 - p), f(1 - p)], [zero] * 4],
        "azema.Ztilde": [[one] * 4, [one] * 4, [one, one, zero, one]],
        "azema.A": [[zero] * 4, [zero, zero, f(p), f(p)], [one, one, f(p), f(p + 1)]],
        "azema.m": [[one] * 4, [one] * 4, [one, one, f(p), f(p + 1)]],
        "hitting_times.R1": ["2"] * 4,
        "hitting_times.R2": ["+inf"] * 4,
        "hitting_times.R3": ["+inf", "+inf", "2", "+inf"],
        "hitting_times.s1": ["2", "2", "1", "1"],
        "hitting_times.s2": ["+inf", "+inf", "2", "2"],
        "hitting_times.s3": ["+inf", "+inf", "2", "+inf"],
        "honesty.holds": True,
        "strategy.S^tau.F": [[zero] * 4, [zero, zero, "-1", "-1"]],
        "strategy.S.G": [[zero] * 4, [zero, zero, "1", "-1"]],
        "verdict.S.F": True,
        "compensated.sum.2": [f(u * u * s0), f(u * d * s0), f(d * s0), f(d * s0)],
        "gap_sets.before.2": ["w3"],
        "gap_sets.after.2": ["w4"],
    }


def _expected_second(lam, u, d, s0):
    f = format_fraction
    one, zero = "1", "0"
    return {
        "azema.Z": [[one] * 4, [one, one, f(1 - lam), f(1 - lam)], [zero] * 4],
        "azema.Ztilde": [[one] * 4, [one] * 4, [one, one, zero, one]],
        "azema.A": [[zero] * 4, [zero, zero, f(lam), f(lam)], [one, one, f(lam), f(lam + 1)]],
        "azema.m": [[one] * 4, [one] * 4, [one, one, f(lam), f(lam + 1)]],
        "honesty.holds": True,
        "verdict.S^tau.G": True,
        "verdict.S-S^tau.G": True,
        "compensated.sum.2": [f(u * u * s0), f(u * d * s0), f(d * s0), f(d * s0)],
        "gap_sets.before.2": [],
        "gap_sets.after.2": [],
    }


def _observed(r: AnalysisReport, key):
    kind, _, rest = key.partition(".")
    if kind in ("azema", "hitting_times"):
        return getattr(r, kind)[rest]
    if kind == "honesty":
        return r.honesty["holds"]
    if kind in ("strategy", "verdict"):
        label, fname = rest.rsplit(".", 1)
        entry = next(v for v in r.verdicts if v["label"] == label and v["filtration"] == fname)
        return entry.get("strategy") if kind == "strategy" else entry["holds"]
    if kind == "compensated":
        return r.compensated.get("sum", [None] * 3)[int(rest.rsplit(".", 1)[1])]
    if kind == "gap_sets":
        side, n = rest.split(".")
        return r.gap_sets[side][int(n) - 1]["outcomes"]
    raise KeyError(key)


def run_examples(which: int, u="2", d="1/2", lam="1/2", s0="1") -> AnalysisReport:
    """Build a worked example at the given parameters, analyse it and check every displayed value."""
    from .binomial_models import first_model, second_model

    if which == 1:
        bm = first_model(u, d, s0)
        expected = _expected_first(bm.params["p"], bm.params["u"], bm.params["d"], bm.params["s0"])
    elif which == 2:
        bm = second_model(u, d, lam, s0)
        expected = _expected_second(bm.params["lambda"], bm.params["u"], bm.params["d"], bm.params["s0"])
    else:
        raise ValueError(f"example id must be 1 or 2, got {which}")
    report = run_analyze(model_from_binomial(bm, f"example{which}"))
    mismatches = []
    for key, want in expected.items():
        got = _observed(report, key)
        if got != want:
            mismatches.append((key, want, got))
    if mismatches:
        diff = []
        for key, want, got in mismatches:
            diff += list(difflib.unified_diff(
                json.dumps(want, indent=1).splitlines(), json.dumps(got, indent=1).splitlines(),
                f"expected {key}", f"computed {key}", lineterm=""))
        raise InvariantBreach("worked example mismatch\n" + "\n".join(diff))
    return report


__all__ = ["AnalysisReport", "AnalyzeOptions", "run_analyze", "render_report", "parse_report",
           "run_examples", "model_from_binomial"]
