import json
import math

import pytest

from agents.report_agent import CSV_COLUMNS, ReportAgent, dump_json, dump_key_value_csv, flatten
from engines.distributions import Normal
from errors import InvalidParameterError
from models.report_model import (
    BreakdownResult,
    EmpiricalReport,
    ExactRankLaw,
    ExperimentConfig,
    ReportRow,
)

reports = ReportAgent()


# ── Tolerance rules ────────────────────────────────────────────────────────

@pytest.mark.parametrize("row, expected", [
    (ReportRow("x", 10.0, 10.9, rule="rel", tol=0.1), True),
    (ReportRow("x", 10.0, 11.5, rule="rel", tol=0.1), False),
    (ReportRow("x", 1.0, 1.04, rule="abs", tol=0.05), True),
    (ReportRow("x", 1.0, 0.9, rule="abs", tol=0.05), False),
    (ReportRow("x", 0.0, 0.25, std_error=0.1, rule="se", tol=3.0), True),
    (ReportRow("x", 0.0, 0.25, std_error=None, rule="se", tol=3.0), False),
    (ReportRow("x", 0.0, 0.2, rule="max", tol=0.3), True),
    (ReportRow("x", 0.0, 0.4, rule="max", tol=0.3), False),
    (ReportRow("x", 3.0, 3.0, rule="exact"), True),
    (ReportRow("x", 3.0, 4.0, rule="exact"), False),
    (ReportRow("x", 3.0, 400.0, rule="info"), True),
    (ReportRow("x", math.inf, math.inf, rule="exact"), True),
    (ReportRow("x", math.inf, 5.0, rule="rel", tol=0.5), False),
    (ReportRow("x", None, 5.0, rule="abs", tol=0.5), False),
])
def test_row_rules(row, expected):
    assert row.passed is expected


def test_unknown_rule():
    with pytest.raises(InvalidParameterError):
        ReportRow("x", 1.0, 1.0, rule="roughly")


def _report():
    report = EmpiricalReport("rank", "k=2;b=3", 100, runtime_seconds=12.5)
    report.add("good", 0.1, 0.1, 0.01, rule="abs", tol=0.0)
    report.add("bad", 1.0, 2.0, rule="rel", tol=0.1)
    return report


def test_report_check():
    report = _report()
    assert [r.statistic for r in report.check()] == ["bad"]
    assert not report.passed
    assert report.row("good").observed == 0.1
    with pytest.raises(KeyError):
        report.row("missing")


def test_report_dict_has_no_runtime():
    payload = _report().to_dict()
    assert set(payload) == {"experiment", "param", "replicate_count", "passed", "rows", "extras"}
    assert "12.5" not in json.dumps(payload)


# ── Output formats ─────────────────────────────────────────────────────────

def test_csv_layout():
    text = reports.render([_report()], "csv")
    lines = text.split("\r\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "rank,k=2;b=3,100,good,0.10000000000000001,0.10000000000000001,0.01"
    assert lines[2] == "rank,k=2;b=3,100,bad,1,2,"
    assert text.endswith("\r\n")


def test_json_single_and_many():
    single = json.loads(reports.render([_report()], "json"))
    assert single["experiment"] == "rank"
    assert single["rows"][0]["observed"] == 0.1
    many = json.loads(reports.render([_report(), _report()], "json"))
    assert len(many["reports"]) == 2
    assert many["passed"] is False


def test_json_writes_non_finite_as_null():
    report = EmpiricalReport("quad", "k=1;b=3", 10)
    report.add("are", math.inf, math.nan, rule="info")
    row = json.loads(reports.render([report], "json"))["rows"][0]
    assert row["predicted"] is None
    assert row["observed"] is None
    assert json.loads(dump_json({"x": [1.0, -math.inf]})) == {"x": [1.0, None]}


def test_unknown_format():
    with pytest.raises(InvalidParameterError):
        reports.render([_report()], "xml")


def test_summary_line():
    assert "FAILED: bad" in reports.summary_line(_report())
    clean = EmpiricalReport("psirem", "k=1;b=3", 5)
    assert reports.summary_line(clean) == "psirem [k=1;b=3] passed 0 row(s)"


def test_flatten_and_key_value_csv():
    payload = {"a": {"b": 1}, "c": [0.5, None], "ok": True}
    assert flatten(payload) == [("a.b", 1), ("c.0", 0.5), ("c.1", None), ("ok", True)]
    assert dump_key_value_csv(payload) == "key,value\r\na.b,1\r\nc.0,0.5\r\nc.1,\r\nok,true\r\n"


# ── Result models ──────────────────────────────────────────────────────────

def test_exact_rank_law_reduction():
    law = ExactRankLaw(k=1, b=3, counts=(0, 6, 0), total=6)
    assert law.reduced() == ((0, 1, 0), 1)
    assert law.to_dict()["probabilities"] == {"2": "1"}


def test_breakdown_result():
    result = BreakdownResult(2, 3, 1e13, 3, (0, 1, 3, 4), tuple(range(1, 10)), 1e13)
    assert result.predicted_size == 4
    assert result.verified
    assert result.to_dict()["witness_size"] == 4


# ── Experiment configuration ───────────────────────────────────────────────

def test_param_label():
    config = ExperimentConfig(distribution=Normal(0.0, 1.0), N=4, Ks=[1, 2, 3, 4], rho=0.5)
    assert config.param == "k=2;b=3;N=4;Ks=1/2/3/4;rho=0.5;dist=normal:0,1"
    chain = ExperimentConfig(distribution=Normal(0.0, 1.0), stages=[(1, 3), (1, 3)])
    assert chain.param == "stages=1x3+1x3;dist=normal:0,1"


@pytest.mark.parametrize("kwargs", [
    {"replicates": 0}, {"replicates": 2.5}, {"threads": 0}, {"batch": 0}, {"seed": None}, {"seed": 1.5},
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(**kwargs)
