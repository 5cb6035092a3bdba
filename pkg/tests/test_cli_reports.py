import json
from fractions import Fraction

import pytest

from apps.threshold.analysis.threshold import ThresholdKind, classify
from apps.threshold.cli.examples import EXAMPLES, joint_counts, run_example
from apps.threshold.cli.instances import describe_perturbation, search_instance
from apps.threshold.cli.main import analyze, main
from apps.threshold.cli.reports import render_json, text_summary, to_jsonable
from apps.threshold.cli.run_config import (
    apply_overrides,
    build_run,
    format_fraction,
    parse_config,
    parse_fraction,
    parse_site,
)
from apps.threshold.config.settings import DevelopmentSettings, ProductionSettings, Settings, get_settings
from apps.threshold.errors import (
    AsymmetricInput,
    InvalidFraction,
    ParseError,
    RationalBackendUnsupported,
    ThresholdError,
    UnknownField,
)
from apps.threshold.free.free_model import build_free_model
from apps.threshold.graph.graph import KVertex, RaySite, build_graph, star_graph
from apps.threshold.linalg.backends import RationalBackend

STAR_DOCUMENT = {
    "graph": {"k_vertices": [0], "k_edges": [], "joints": [0, 0, 0]},
    "perturbation": {"joining": {}},
    "engine": {"window": 4},
}


def _parse(document):
    return parse_config(json.dumps(document), Settings())


def test_parse_fraction_is_exact():
    assert parse_fraction("3/4") == Fraction(3, 4)
    assert parse_fraction("0.1") == Fraction(1, 10)
    assert parse_fraction(0.1) == Fraction(1, 10)
    assert parse_fraction(-7) == -7
    assert parse_fraction(" 1 / 3 ") == Fraction(1, 3)
    for bad in ("abc", "1/0", True, None):
        with pytest.raises(InvalidFraction):
            parse_fraction(bad)


def test_format_fraction():
    assert format_fraction(Fraction(3, 4)) == "3/4"
    assert format_fraction(Fraction(-6, 3)) == "-2"


def test_parse_site():
    graph = build_graph(["a", "b"], [("a", "b")], ["a", "b"])

    assert parse_site(graph, "3^(2)") == RaySite(2, 3)
    assert parse_site(graph, "b") == KVertex("b")
    with pytest.raises(ParseError):
        parse_site(graph, "c")
    with pytest.raises(ThresholdError):
        parse_site(graph, "1^(3)")


def test_config_defaults_come_from_settings():
    config = _parse(STAR_DOCUMENT)

    assert config.perturbation.mode == "joining"
    assert config.backend.name == "rational"
    assert config.engine.window == 4
    assert config.engine.kernel_cap == 8
    assert config.engine.kappas == [0.4, 0.2, 0.1, 0.05]


def test_decimal_values_are_read_exactly():
    document = {
        "graph": {"k_vertices": [0], "joints": [0]},
        "perturbation": {"factored": {"columns": [{"0": 0.1, "2^(1)": "1/3"}], "U": [[1]]}},
    }
    config = _parse(document)

    assert config.perturbation.factored.columns[0] == {"0": Fraction(1, 10), "2^(1)": Fraction(1, 3)}
    context = build_run(config)
    assert context.perturbation.columns[0].value(RaySite(1, 2)) == Fraction(1, 3)


@pytest.mark.parametrize(
    "document,error",
    [
        ({**STAR_DOCUMENT, "colour": "blue"}, UnknownField),
        ({**STAR_DOCUMENT, "engine": {"windows": 3}}, UnknownField),
        ({**STAR_DOCUMENT, "perturbation": {"joining": {}, "none": {}}}, UnknownField),
        ({**STAR_DOCUMENT, "perturbation": {}}, UnknownField),
        ({"perturbation": {"joining": {}}}, ParseError),
        ({**STAR_DOCUMENT, "engine": {"kappas": [0.1, 0.2]}}, ParseError),
        ({**STAR_DOCUMENT, "engine": {"kernel_cap": 3}}, ParseError),
        ({**STAR_DOCUMENT, "backend": {"name": "quad"}}, ParseError),
        (
            {**STAR_DOCUMENT, "perturbation": {"factored": {"columns": [{"0": "x"}], "U": [[1]]}}},
            InvalidFraction,
        ),
    ],
)
def test_invalid_documents(document, error):
    with pytest.raises(error):
        _parse(document)


def test_malformed_json_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_config("{not json", Settings())
    with pytest.raises(ParseError):
        parse_config("[1, 2]", Settings())


def test_family_forces_the_float_backend():
    config = _parse({"perturbation": {"family": {"E": "1/2", "tau": 0.5}}, "backend": {"name": "rational"}})

    assert config.backend.name == "float"
    assert config.perturbation.family.tau == Fraction(1, 2)
    overridden = apply_overrides(config, {"name": "rational"})
    assert overridden.backend.name == "float"

    context = build_run(config)
    assert context.graph.ray_count == 2
    assert classify(context.model, context.perturbation) is not ThresholdKind.REGULAR


def test_dense_entries_are_symmetrized():
    document = {
        "graph": {"k_vertices": [0], "joints": [0, 0]},
        "perturbation": {"dense": {"entries": [[0, "1^(1)", -1], [0, "1^(2)", -1]]}},
        "backend": {"name": "float"},
    }
    context = build_run(_parse(document))

    assert context.perturbation.k == 2
    assert classify(context.model, context.perturbation) is ThresholdKind.FIRST_KIND


def test_dense_entries_must_agree_and_need_floats():
    conflicting = {
        "graph": {"k_vertices": [0], "joints": [0]},
        "perturbation": {"dense": {"entries": [[0, "1^(1)", 1], ["1^(1)", 0, 2]]}},
        "backend": {"name": "float"},
    }
    with pytest.raises(AsymmetricInput):
        build_run(_parse(conflicting))

    exact = {**conflicting, "perturbation": {"dense": {"entries": [[0, 0, 1]]}}, "backend": {"name": "rational"}}
    with pytest.raises(RationalBackendUnsupported):
        build_run(_parse(exact))


def test_overrides_win_over_the_document():
    config = apply_overrides(_parse(STAR_DOCUMENT), {"window": 2, "kappas": [0.2, 0.1], "report": "out.json"})

    assert config.engine.window == 2
    assert config.engine.kappas == [0.2, 0.1]
    assert config.output.report == "out.json"


def test_to_jsonable():
    assert to_jsonable(Fraction(1, 3)) == "1/3"
    assert to_jsonable(float("inf")) == "inf"
    assert to_jsonable(ThresholdKind.THIRD_KIND) == "third_kind"
    assert to_jsonable({RaySite(1, 2): [Fraction(2)]}) == {"2^(1)": ["2"]}
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_classify_report_is_deterministic():
    context = build_run(_parse(STAR_DOCUMENT))

    first = render_json(analyze("classify", context))
    second = render_json(analyze("classify", build_run(_parse(STAR_DOCUMENT))))

    assert first == second
    parsed = json.loads(first)
    assert parsed["analysis"]["classification"] == "first_kind"
    assert parsed["analysis"]["matrices"]["M0"] == [["1/3", "-1"], ["-1", "3"]]
    assert parsed["analysis"]["dims"] == {"nonresonance": 2, "resonance": 1, "bound": 0}


def test_expand_compares_with_closed_forms():
    result = analyze("expand", build_run(_parse(STAR_DOCUMENT)))

    assert result["passed"]
    assert result["expansion"]["closed_form_agreement"] == {0: True, 1: True}
    assert set(result["expansion"]["kernels"]["tables"]) == {"G-2", "G-1", "G0", "G1"}
    summary = text_summary(result)
    assert "Classification: first_kind" in summary
    assert "G0 agree" in summary


@pytest.mark.parametrize("name", EXAMPLES)
def test_examples_pass(name):
    report = run_example(name)

    assert report.checks
    assert report.passed, [check.name for check in report.checks if not check.passed]


def test_joint_counts_on_a_star():
    graph = star_graph(3)
    model = build_free_model(graph, RationalBackend())

    assert joint_counts(graph, model.h0_inverse_power(1)) == {"distinct": 1, "per_ray": 3}


@pytest.mark.parametrize("kind", [ThresholdKind.REGULAR, ThresholdKind.SECOND_KIND, ThresholdKind.THIRD_KIND])
def test_search_finds_each_type(kind):
    instance = search_instance(kind)

    assert classify(instance.model, instance.perturbation) is kind
    described = describe_perturbation(instance.perturbation)
    assert len(described["columns"]) == instance.perturbation.k


def test_main_writes_report_and_summary(tmp_path, capsys):
    config_path = tmp_path / "star.json"
    config_path.write_text(json.dumps(STAR_DOCUMENT), encoding="utf-8")
    report_path = tmp_path / "out" / "star_report.json"

    code = main(["--out", str(report_path), "classify", str(config_path)])

    assert code == 0
    assert json.loads(report_path.read_text(encoding="utf-8"))["analysis"]["classification"] == "first_kind"
    assert report_path.with_suffix(".txt").read_text(encoding="utf-8").startswith("Threshold analyzer: classify")
    assert "Overall: PASS" in capsys.readouterr().out


def test_main_input_errors_exit_with_two(tmp_path):
    assert main(["classify", str(tmp_path / "missing.json")]) == 2

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**STAR_DOCUMENT, "extra": 1}), encoding="utf-8")
    assert main(["classify", str(bad)]) == 2


def test_main_runs_an_example(capsys):
    assert main(["example", "star"]) == 0
    assert "Example: star" in capsys.readouterr().out


def test_settings_read_the_environment(monkeypatch):
    monkeypatch.setenv("THRESHOLD_BACKEND", " Float ")
    monkeypatch.setenv("THRESHOLD_KAPPAS", "[0.3, 0.1]")
    monkeypatch.setenv("THRESHOLD_FREE_OPERATOR", "scaled-identity")

    settings = Settings()

    assert settings.backend == "float"
    assert settings.kappa_tuple() == (0.3, 0.1)
    assert settings.free_operator == "scaled_identity"


def test_settings_validators_reject_bad_values():
    with pytest.raises(ValueError):
        Settings(kernel_cap=4)
    with pytest.raises(ValueError):
        Settings(kappas="0.1,0.2")
    with pytest.raises(ValueError):
        Settings(rank_tol=0)
    assert Settings(kappas="0.4, 0.2").kappas == [0.4, 0.2]


@pytest.mark.parametrize(
    "environment, expected",
    [("production", ProductionSettings), ("development", DevelopmentSettings), ("", Settings)],
)
def test_get_settings_follows_the_environment(monkeypatch, environment, expected):
    monkeypatch.setenv("ENVIRONMENT", environment)

    assert type(get_settings()) is expected
