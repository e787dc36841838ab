import io
import json

import pytest

from tauarb import InvariantBreach, ModelError
from tauarb.cli import main
from tauarb.model_io import bundled_example, model_from_dict, model_to_dict
from tauarb.binomial_models import first_model
from tauarb.report import AnalyzeOptions, parse_report, render_report, run_analyze, run_examples

DATA = "src/tauarb/data"


def run(argv, monkeypatch=None):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_first_example_report_content():
    report = run_analyze(bundled_example(1))
    by = {(v["label"], v["filtration"]): v for v in report.verdicts}
    assert by[("S^tau", "F")]["holds"] is False and by[("S^tau", "G")]["holds"] is False
    assert by[("S", "F")]["holds"] is True and by[("S", "G")]["holds"] is False
    assert by[("S^tau", "F")]["gains"] == ["0", "0", "0", "1/4"]
    assert report.hitting_times["R3"] == ["+inf", "+inf", "2", "+inf"]


def test_second_example_report_content():
    report = run_analyze(bundled_example(2))
    by = {(v["label"], v["filtration"]): v for v in report.verdicts}
    assert by[("S^tau", "G")]["holds"] and by[("S-S^tau", "G")]["holds"]
    assert report.azema["Z"][1] == ["1", "1", "1/2", "1/2"]


def test_terminal_time_model_is_clean():
    bm = first_model()
    doc = model_to_dict(bm.space, bm.F, [bm.S], [bm.tau])
    doc["random_times"]["tau"] = {o: 2 for o in bm.space.outcomes}
    report = run_analyze(model_from_dict(doc))
    assert all(v["holds"] for v in report.verdicts)
    assert report.equivalence["before"]["b"] and report.equivalence["after"]["e"]
    assert all(report.equivalence[s][k] for s in ("before", "after") for k in "bcde")


def test_render_is_deterministic_and_exact():
    report = run_analyze(bundled_example(1))
    for fmt in ("text", "json"):
        assert render_report(report, fmt) == render_report(run_analyze(bundled_example(1)), fmt)
    text = render_report(report, "text").decode()
    assert "2/3" in text and "0.66" not in text


def test_json_round_trip():
    report = run_analyze(bundled_example(1))
    assert parse_report(render_report(report, "json")) == report


def test_examples_check_themselves():
    assert run_examples(1).compensated["sum"][2] == ["4", "1", "1/2", "1/2"]
    assert run_examples(2, lam="1/3").azema["Z"][1] == ["1", "1", "2/3", "2/3"]
    assert run_examples(1, u="3", d="1/3", s0="2").compensated["sum"][2] == ["18", "2", "2/3", "2/3"]
    with pytest.raises(ValueError):
        run_examples(3)
    with pytest.raises(ModelError):
        run_examples(2, lam="1")


def test_example_mismatch_aborts_with_diff(monkeypatch):
    import tauarb.report as report_mod

    real = report_mod._expected_first

    def wrong(*args):
        table = real(*args)
        table["hitting_times.R2"] = ["1"] * 4
        return table

    monkeypatch.setattr(report_mod, "_expected_first", wrong)
    with pytest.raises(InvariantBreach, match=r"\+\s*\"\+inf\""):
        run_examples(1)
    assert main(["examples", "--id", "1"], io.StringIO()) == 3


def test_before_only_option():
    report = run_analyze(bundled_example(1), AnalyzeOptions(before=True, after=False))
    assert "after" not in report.equivalence and "after" not in report.deflators


def test_cli_exit_codes(tmp_path):
    assert run(["examples", "--id", "1"])[0] == 0
    assert run(["examples", "--id", "3"])[0] == 1
    assert run(["nonsense"])[0] == 1
    assert run(["analyze"])[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"horizon": 1')
    assert run(["analyze", str(bad)])[0] == 2
    assert run(["examples", "--id", "1", "--d", "2"])[0] == 2
    assert run(["analyze", f"{DATA}/example1.json", "--process", "nope"])[0] == 2


def test_cli_na_check_methods_agree():
    outs = []
    for method in ("sign", "lp", "brute"):
        code, out = run(["na-check", f"{DATA}/example1.json", "--part", "whole", "--filtration", "G",
                         "--method", method, "--format", "json"])
        assert code == 0
        outs.append(json.loads(out)["holds"])
    assert outs == [False, False, False]


def test_cli_find_arbitrage_and_measures():
    code, out = run(["find-arbitrage", f"{DATA}/example1.json", "--part", "stopped", "--filtration", "F",
                     "--format", "json"])
    assert json.loads(out)["gains"] == ["0", "0", "0", "1/4"]
    code, out = run(["find-arbitrage", f"{DATA}/example2.json", "--format", "json"])
    assert json.loads(out) == {"holds": True, "arbitrage": "none"}
    code, out = run(["measure", f"{DATA}/example1.json", "--which", "q", "--format", "json"])
    assert json.loads(out)["density"] == ["1", "1", "1/3", "4/3"]
    for which in ("qa", "qe", "qe-tilde", "pp", "pp-after"):
        assert run(["measure", f"{DATA}/example1.json", "--which", which])[0] == 0
    code, out = run(["deflator", f"{DATA}/example1.json", "--format", "json"])
    assert json.loads(out)["g_martingale"] is True


def test_cli_validate_and_fuzz():
    code, out = run(["validate-theorems", f"{DATA}/example1.json", "--format", "json"])
    assert code == 0 and json.loads(out)["before"]["consistent"]
    code, out = run(["fuzz", "--count", "20", "--side", "before", "--format", "json"])
    assert code == 0 and json.loads(out)["before_checked"] == 20
    assert run(["fuzz", "--count", "1", "--max-outcomes", "1"])[0] == 1


def test_format_from_environment(monkeypatch):
    monkeypatch.setenv("TAUARB_FORMAT", "json")
    code, out = run(["analyze", f"{DATA}/example2.json"])
    assert code == 0 and json.loads(out)["model"]["process"] == "S"
    monkeypatch.setenv("TAUARB_FORMAT", "text")
    assert run(["analyze", f"{DATA}/example2.json"])[1].startswith("model ")


def test_cli_output_is_byte_stable():
    first = run(["analyze", f"{DATA}/example1.json", "--format", "json"])[1]
    second = run(["analyze", f"{DATA}/example1.json", "--format", "json"])[1]
    assert first == second
