import json
import math

import numpy as np
import pytest

from _util import gamma_sample
from youden_drm.cli import EXIT_DATA, EXIT_ESTIMATION, EXIT_OK, main
from youden_drm.dataio import parse_dataset, write_dataset
from youden_drm.drm import BiomarkerSample
from youden_drm.errors import DataError, EmptyGroup, ParseError
from youden_drm.report import EstimateReport


def _csv(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_two_rows(tmp_path):
    s = parse_dataset(_csv(tmp_path, "group,value\n0,1.5\n1,2.5\n"))["value"]
    assert (s.n0, s.n1) == (1, 1)
    assert s.healthy_detected.tolist() == [1.5]
    assert s.diseased_detected.tolist() == [2.5]


def test_parse_with_llod(tmp_path):
    p = _csv(tmp_path, "value,group\n1.0,0\n2.0,0\n-inf,0\n1.2,1\n3.0,1\n")
    s = parse_dataset(p, llod=1.5)["value"]
    assert (s.healthy_below, s.diseased_below) == (2, 1)
    assert s.healthy_detected.tolist() == [2.0]
    assert s.diseased_detected.tolist() == [3.0]


def test_parse_multiple_biomarkers(tmp_path):
    p = _csv(tmp_path, "group,value,biomarker\n0,1,a\n1,2,a\n0,3,b\n1,4,b\n")
    out = parse_dataset(p)
    assert list(out) == ["a", "b"]


@pytest.mark.parametrize(
    "text,line",
    [
        ("group,value\n0,1\n2,3\n", 3),
        ("group,value\n0,1\n1,abc\n", 3),
        ("group,value\n0,1\n1,nan\n", 3),
        ("group,value\n0,1\n\n1,-inf\n", 4),
        ("group,value\n0,1,2\n", 2),
        ("grp,value\n", 1),
    ],
)
def test_parse_errors_report_line(tmp_path, text, line):
    p = _csv(tmp_path, text)
    with pytest.raises(ParseError) as ei:
        parse_dataset(p)
    assert ei.value.line == line
    assert str(p) in str(ei.value)


def test_empty_group(tmp_path):
    with pytest.raises(EmptyGroup):
        parse_dataset(_csv(tmp_path, "group,value\n0,1\n0,2\n"))


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="nope.csv"):
        parse_dataset(tmp_path / "nope.csv")


def test_csv_round_trip_is_exact(tmp_path):
    s = gamma_sample(np.random.default_rng(0), 40, 35, llod=1.37)
    p = tmp_path / "rt.csv"
    write_dataset(p, s)
    back = parse_dataset(p, llod=1.37)["value"]
    np.testing.assert_array_equal(np.sort(back.healthy_detected), np.sort(s.healthy_detected))
    np.testing.assert_array_equal(np.sort(back.diseased_detected), np.sort(s.diseased_detected))
    assert (back.healthy_below, back.diseased_below) == (s.healthy_below, s.diseased_below)


def _estimate(tmp_path, path, *extra):
    out = tmp_path / "report.json"
    code = main(["estimate", "--input", str(path), "--basis", "linear", "--output", str(out), *extra])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_estimate_end_to_end(tmp_path):
    s = gamma_sample(np.random.default_rng(1), 120, 120)
    p = tmp_path / "g.csv"
    write_dataset(p, s)
    code, rep = _estimate(tmp_path, p, "--methods", "drm,ecdf", "--bootstrap-B", "200")
    assert code == EXIT_OK
    (b,) = rep["biomarkers"]
    drm, ecdf = b["methods"]
    assert drm["method"] == "drm" and ecdf["method"] == "ecdf"
    assert drm["ci_j"][0] <= drm["j_hat"] <= drm["ci_j"][1]
    assert drm["ci_c"][0] <= drm["c_hat"] <= drm["ci_c"][1]
    assert ecdf["ci_j"] is not None
    assert rep["llod"] is None
    back = EstimateReport.from_json(json.dumps(rep))
    assert back.to_dict() == rep


def test_report_round_trip_with_llod():
    rep = EstimateReport("x.csv", "linear", 1.5, 0.9, ["drm"], 0, 7)
    assert EstimateReport.from_json(rep.to_json()) == rep
    rep2 = EstimateReport("x.csv", "linear", -math.inf, 0.9, ["drm"], 0, None)
    assert EstimateReport.from_json(rep2.to_json()) == rep2


def test_csv_format(tmp_path, capsys):
    s = gamma_sample(np.random.default_rng(2), 60, 60)
    p = tmp_path / "g.csv"
    write_dataset(p, s)
    assert main(["estimate", "--input", str(p), "--basis", "linear", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("biomarker,method,quantity,estimate")
    assert len(lines) == 3


def test_separation_reports_diagnostics(tmp_path):
    p = _csv(tmp_path, "group,value\n0,1\n0,2\n0,3\n1,4\n1,5\n1,6\n")
    code, rep = _estimate(tmp_path, p)
    assert code == EXIT_OK
    drm = rep["biomarkers"][0]["methods"][0]
    assert drm["ci_j"] is None and drm["ci_c"] is None
    diag = " ".join(drm["diagnostics"])
    assert "separat" in diag
    assert "confidence intervals suppressed" in diag


def test_exit_codes(tmp_path, capsys):
    assert main(["estimate", "--input", str(tmp_path / "none.csv"), "--basis", "linear"]) == EXIT_DATA
    assert "none.csv" in capsys.readouterr().err
    p = _csv(tmp_path, "group,value\n0,1\n1,x\n")
    assert main(["estimate", "--input", str(p), "--basis", "linear"]) == EXIT_DATA
    good = _csv(tmp_path, "group,value\n0,1\n0,2\n1,3\n1,4\n", "g.csv")
    assert main(["estimate", "--input", str(good), "--basis", "nope"]) == EXIT_DATA
    # nonpositive values under a log basis: a domain error is a data problem
    neg = _csv(tmp_path, "group,value\n0,-1\n0,2\n1,3\n1,4\n", "n.csv")
    assert main(["estimate", "--input", str(neg), "--basis", "loglog"]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "youden_drm." in err


def test_estimation_failure_exit_code(tmp_path, capsys):
    # all healthy units censored: no detected healthy values
    p = _csv(tmp_path, "group,value\n0,-inf\n0,-inf\n1,3\n1,4\n")
    code = main(["estimate", "--input", str(p), "--basis", "linear", "--llod", "1", "--methods", "ecdf",
                 "--bootstrap-B", "0", "--output", str(tmp_path / "o.json")])
    assert code in (EXIT_DATA, EXIT_ESTIMATION)
    rep = json.loads((tmp_path / "o.json").read_text())
    assert rep["biomarkers"][0]["error"]


def test_simulate_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"name": "tiny", "family": "gamma", "target_J": 0.4, "n0": 30, "n1": 30,
                               "reps": 4, "bootstrap_B": 0}))
    assert main(["simulate", "--scenario", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    out = capsys.readouterr().out.split()
    assert out == [str(tmp_path / "o" / "tiny_metrics.csv"), str(tmp_path / "o" / "tiny_summary.json")]
    summary = json.loads((tmp_path / "o" / "tiny_summary.json").read_text())
    assert summary["scenario"]["reps"] == 4
    cfg.write_text("{}")
    assert main(["simulate", "--scenario", str(cfg)]) == EXIT_DATA
