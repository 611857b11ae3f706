import json
import logging

import pytest

from burdenaudit import classifier, dataset as ds, synthgen
from burdenaudit.counterfactual import read_counterfactuals
from burdenaudit.errors import StageError
from burdenaudit.harness import ExperimentConfig, emit_plot, rebuild_report, run_experiment
from burdenaudit.harness import cli, pipeline
from burdenaudit.harness.plot import render_svg

from conftest import DATA_DIR


@pytest.fixture(scope="module")
def da_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("da")
    return run_experiment(ExperimentConfig.from_dict({"preset": "da", "seed": 42, "output_dir": str(out)}))


def test_run_writes_every_artifact(da_run):
    for path in (da_run.dataset, da_run.schema, da_run.model, da_run.counterfactuals, da_run.report,
                 da_run.plot, da_run.run):
        assert path.is_file()
    assert set(da_run.timing) >= {"load", "clean", "sample", "train", "counterfactuals", "report", "emit"}
    doc = json.loads(da_run.report.read_text())
    assert doc["accuracy"] == 1.0
    assert doc["seeds"] == {"data": 42, "train": 42, "ga": 42}
    assert len(doc["config_digest"]) == 64
    assert doc["counterfactuals"] == {"generated": 40, "invalid": 0}
    assert "timing_seconds" in json.loads(da_run.run.read_text())


def test_report_is_byte_identical_across_runs(da_run, tmp_path):
    again = run_experiment(ExperimentConfig.from_dict({"preset": "da", "seed": 42, "output_dir": str(tmp_path)}))
    assert again.report.read_bytes() == da_run.report.read_bytes()
    assert again.counterfactuals.read_bytes() == da_run.counterfactuals.read_bytes()
    assert again.plot.read_bytes() == da_run.plot.read_bytes()


def test_report_recomputes_from_artifacts(da_run):
    assert rebuild_report(da_run.report.parent) == json.loads(da_run.report.read_text())


def test_plot_rerenders_identically(da_run, tmp_path):
    data, model, cfs = pipeline.load_run(da_run.report.parent)
    path = emit_plot(data, model, cfs, tmp_path / "p.svg", "preset da")
    assert path.read_bytes() == da_run.plot.read_bytes()


def test_svg_contents(da_run):
    svg = da_run.plot.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count('class="boundary"') == 1
    assert svg.count('class="connector"') == 40
    assert svg.count("stroke-dasharray") == 41
    for label in ("S=0, Y=0", "S=0, Y=1", "S=1, Y=0", "S=1, Y=1", "counterfactual"):
        assert label in svg


def test_plot_without_counterfactuals():
    data = synthgen.generate(synthgen.preset_DA(), 1)
    X, _, Y = ds.split(data)
    svg = render_svg(data, classifier.train(X, Y), [])
    assert 'class="boundary"' in svg and 'class="connector"' not in svg


def test_plot_skipped_for_high_dimension(tmp_path, taiwan_csv, taiwan_schema, caplog):
    data, _ = ds.clean(ds.load_csv(taiwan_csv, taiwan_schema))
    model = classifier.LinearModel((0.0,) * 18 + (1.0,), 0.0)
    with caplog.at_level(logging.WARNING):
        assert emit_plot(data, model, [], tmp_path / "x.svg") is None
    assert not (tmp_path / "x.svg").exists()
    assert "plot skipped" in caplog.text


def test_missing_data_file_names_stage(tmp_path):
    cfg = ExperimentConfig.from_dict({"data": str(tmp_path / "missing.csv"),
                                      "schema": str(DATA_DIR / "taiwan_schema.yaml"),
                                      "output_dir": str(tmp_path / "out")})
    with pytest.raises(StageError) as info:
        run_experiment(cfg)
    assert info.value.stage == "load"
    assert not (tmp_path / "out").exists()


def test_failed_stage_removes_partial_artifacts(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(pipeline, "emit_plot", boom)
    out = tmp_path / "run"
    with pytest.raises(StageError) as info:
        run_experiment(ExperimentConfig.from_dict({"preset": "db", "output_dir": str(out)}))
    assert info.value.stage == "emit"
    assert not out.exists() or not any(out.iterdir())


def test_config_requires_one_source():
    with pytest.raises(ValueError):
        ExperimentConfig().validate()
    with pytest.raises(ValueError):
        ExperimentConfig(preset="da", data="x.csv").validate()


def test_config_file(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("preset: db\nseed: 3\nprofile: desk\nga:\n  mutation_probability: 0.3\n"
                    "train:\n  iterations: 500\n")
    cfg = ExperimentConfig.load(path)
    assert cfg.ga.mutation_probability == 0.3 and cfg.ga.seed == 3 and cfg.ga.population_size == 600
    assert cfg.train.iterations == 500 and cfg.train.learning_rate == 0.001


def test_taiwan_fixture_config_resolves_paths():
    cfg = ExperimentConfig.load(DATA_DIR / "taiwan_fixture.yaml")
    assert cfg.data.is_file() and cfg.schema.is_file()
    assert cfg.sample_size == 1000 and cfg.fairness.groups == (2, 1)


# CLI


def test_cli_gen(tmp_path, capsys):
    out = tmp_path / "da.csv"
    assert cli.main(["gen", "--preset", "da", "--seed", "3", "--out", str(out),
                     "--schema-out", str(tmp_path / "s.yaml")]) == 0
    data = ds.load_csv(out, ds.load_schema(tmp_path / "s.yaml"))
    assert data.points == synthgen.generate(synthgen.preset_DA(), 3).points
    assert out.read_text().splitlines()[0] == "x1,x2,s,y"


def test_cli_train(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert cli.main(["train", "--preset", "db", "--seed", "42", "--out", str(out)]) == 0
    assert "accuracy 1.0000" in capsys.readouterr().out
    assert classifier.load_model(out).feature_count == 2


def test_cli_audit_and_plot(tmp_path, capsys):
    out = tmp_path / "run"
    assert cli.main(["audit", "--preset", "da", "--seed", "42", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "statistical parity  1.0000" in text
    first = (out / "plot.svg").read_bytes()
    (out / "plot.svg").unlink()
    assert cli.main(["plot", str(out)]) == 0
    assert (out / "plot.svg").read_bytes() == first
    capsys.readouterr()
    assert cli.main(["audit", "--from-run", str(out)]) == 0
    rebuilt = json.loads(capsys.readouterr().out)
    assert rebuilt == json.loads((out / "report.json").read_text())


def test_cli_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envrun"))
    assert cli.main(["audit", "--preset", "db", "--seed", "1"]) == 0
    assert (tmp_path / "envrun" / "report.json").is_file()


def test_cli_missing_data(tmp_path, capsys):
    code = cli.main(["audit", "--data", str(tmp_path / "nope.csv"), "--schema",
                     str(DATA_DIR / "taiwan_schema.yaml"), "--out", str(tmp_path / "o")])
    assert code != 0
    assert "stage 'load'" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["frobnicate"], ["audit", "--bogus"], []])
def test_cli_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2


def test_cli_oracle_check(tmp_path, capsys):
    table = tmp_path / "t.json"
    assert cli.main(["oracle-check", "--preset", "db", "--seed", "7", "--out", str(table)]) == 0
    assert "PASS" in capsys.readouterr().out
    rows = json.loads(table.read_text())
    assert len(rows) == 30 and all(r["ratio"] <= 1.10 for r in rows)


def test_cli_taiwan_fixture(tmp_path, capsys):
    out = tmp_path / "tw"
    assert cli.main(["audit", "--config", str(DATA_DIR / "taiwan_fixture.yaml"), "--out", str(out)]) == 0
    assert not (out / "plot.svg").exists()
    assert len(read_counterfactuals(out / "counterfactuals.jsonl")) > 0
