import pytest

from engines.distributions import Normal, Pareto
from errors import CapacityError, EmptySketchError, InputParseError, InvalidParameterError, ToleranceViolation
from models.report_model import EmpiricalReport, ExperimentConfig
from orchestrator import EXPERIMENTS, Orchestrator, parse_stream

orchestrator = Orchestrator()


def test_parse_stream_skips_blank_lines():
    assert list(parse_stream(["1\n", "\n", " 2.5 \r\n", "-3e2"])) == [1.0, 2.5, -300.0]


@pytest.mark.parametrize("lines, line", [(["1", "abc"], 2), (["nan"], 1), (["1", "", "inf"], 3), (["1_000"], 1)])
def test_parse_stream_reports_the_line(lines, line):
    with pytest.raises(InputParseError) as info:
        list(parse_stream(lines))
    assert info.value.line == line
    assert str(info.value) == f"line {line}: invalid number"


def test_stream_answer():
    answer = orchestrator.stream(["5", "1", "3", "2"], 2, 3)
    assert answer["estimate"] == 3.0
    assert answer["n"] == 4
    assert answer["digits"] == [1, 1]
    assert answer["breakdown_point"] == "4/9"
    assert not answer["at_capacity"]


def test_stream_errors():
    with pytest.raises(CapacityError):
        orchestrator.stream([str(i) for i in range(10)], 2, 3)
    with pytest.raises(EmptySketchError):
        orchestrator.stream([], 1, 3)


def test_analyze_normal():
    answer = orchestrator.analyze(3, 101, Normal(0.0, 1.0))
    assert answer["breakdown_point"] == "132651/1030301"
    assert answer["correlations"]["mean_median"] == pytest.approx(0.80, abs=0.005)
    assert answer["correlations"]["remedian_remedian_rank"] == pytest.approx(0.77, abs=0.005)
    assert answer["memory_cells"] == 303
    assert "mean_coordinate" not in answer
    assert "multi" not in answer


def test_analyze_without_variance():
    answer = orchestrator.analyze(2, 3, Pareto(1.0, 1.0))
    assert answer["mean_coordinate"] == "unavailable"
    assert answer["correlations"]["mean_median"] is None
    assert answer["correlations"]["median_remedian"] is not None


def test_analyze_with_buffer():
    answer = orchestrator.analyze(2, 3, Normal(0.0, 1.0), N=4)
    assert len(answer["multi"]["ptildes"]) == 4
    assert answer["multi"]["breakdown_point"] == "1/9"
    row_arcsin = answer["multi"]["covariance_row_arcsin"]
    scaled = answer["multi"]["covariance"]["covariance"]
    assert row_arcsin[1][1] == pytest.approx(scaled[1][1])
    assert 0.0 < row_arcsin[0][1] < scaled[0][1]
    with pytest.raises(InvalidParameterError):
        orchestrator.analyze(2, 3, Normal(0.0, 1.0), N=3, Ks=[4])


def test_every_experiment_has_a_handler():
    assert set(orchestrator._handlers()) == set(EXPERIMENTS)
    with pytest.raises(InvalidParameterError):
        orchestrator.run("nope", ExperimentConfig())


def test_run_sets_runtime_and_gates():
    report = orchestrator.run("exact-rank", ExperimentConfig(k=1, b=3))
    assert report.passed
    assert report.runtime_seconds >= 0.0
    failing = EmpiricalReport("rank", "k=2;b=3", 10)
    failing.add("x", 1.0, 2.0, rule="exact")
    with pytest.raises(ToleranceViolation):
        orchestrator.gate(failing)
