"""End-to-end audit: data -> classifier -> counterfactuals -> fairness report."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from burdenaudit import classifier, counterfactual, dataset as ds, fairness, synthgen
from burdenaudit.classifier import TrainConfig
from burdenaudit.counterfactual import GaConfig
from burdenaudit.errors import StageError
from burdenaudit.fairness import FairnessConfig
from burdenaudit.harness.plot import emit_plot

log = logging.getLogger(__name__)

DATASET_FILE = "dataset.csv"
SCHEMA_FILE = "schema.yaml"
MODEL_FILE = "model.json"
COUNTERFACTUAL_FILE = "counterfactuals.jsonl"
REPORT_FILE = "report.json"
PLOT_FILE = "plot.svg"
RUN_FILE = "run.json"


@dataclass
class ExperimentConfig:
    preset: str | None = None
    data: Path | None = None
    schema: Path | None = None
    sample_size: int | None = None
    seed: int = 42
    train: TrainConfig = field(default_factory=TrainConfig)
    ga: GaConfig = field(default_factory=GaConfig.desk)
    profile: str = "desk"
    sensitive_column: str | None = None
    fairness: FairnessConfig = field(default_factory=FairnessConfig)
    output_dir: Path = Path("runs/audit")
    workers: int = 1

    def validate(self):
        if (self.preset is None) == (self.data is None):
            raise ValueError("give exactly one data source: a preset or a CSV path")
        if self.preset is not None and self.preset not in synthgen.PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(synthgen.PRESETS)}")
        if self.data is not None and self.schema is None:
            raise ValueError("a CSV data source needs a schema file")

    def describe(self) -> dict:
        """Everything that determines the results, in JSON-able form (output location excluded)."""
        return {
            "preset": self.preset,
            "data": str(self.data) if self.data is not None else None,
            "schema": str(self.schema) if self.schema is not None else None,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "profile": self.profile,
            "sensitive_column": self.sensitive_column,
            "train": asdict(self.train),
            "ga": counterfactual.config_to_dict(self.ga),
            "fairness": {**asdict(self.fairness), "groups": list(self.fairness.groups)},
        }

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    @classmethod
    def from_dict(cls, doc: dict, **overrides) -> ExperimentConfig:
        doc = {**(doc or {}), **{k: v for k, v in overrides.items() if v is not None}}
        seed = int(doc.get("seed", 42))
        profile = doc.get("profile", "desk")
        if profile not in counterfactual.PROFILES:
            raise ValueError(f"unknown GA profile {profile!r}")
        ga_doc = dict(doc.get("ga") or {})
        if ga_doc.get("feature_ranges") is not None:
            ga_doc["feature_ranges"] = tuple(tuple(r) for r in ga_doc["feature_ranges"])
        ga = counterfactual.PROFILES[profile](**{"seed": seed, **ga_doc})
        train = TrainConfig(**{"seed": seed, **(doc.get("train") or {})})
        fdoc = dict(doc.get("fairness") or {})
        if "groups" in fdoc:
            fdoc["groups"] = tuple(fdoc["groups"])
        return cls(
            preset=doc.get("preset"),
            data=Path(doc["data"]) if doc.get("data") else None,
            schema=Path(doc["schema"]) if doc.get("schema") else None,
            sample_size=doc.get("sample_size"),
            seed=seed,
            train=train,
            ga=ga,
            profile=profile,
            sensitive_column=doc.get("sensitive_column"),
            fairness=FairnessConfig(**fdoc),
            output_dir=Path(doc.get("output_dir", "runs/audit")),
            workers=int(doc.get("workers", 1)),
        )

    @classmethod
    def load(cls, path: str | Path, **overrides) -> ExperimentConfig:
        with Path(path).open(encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        base = Path(path).parent
        for key in ("data", "schema"):
            # relative data paths resolve against the config file
            if doc.get(key) and not Path(doc[key]).is_absolute():
                doc[key] = str(base / doc[key])
        return cls.from_dict(doc, **overrides)


@dataclass
class RunArtifacts:
    dataset: Path
    schema: Path
    model: Path
    counterfactuals: Path
    report: Path
    plot: Path | None
    run: Path
    timing: dict[str, float]
    report_doc: dict = field(repr=False, default_factory=dict)


@contextmanager
def _stage(name: str, timing: dict):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    finally:
        timing[name] = time.perf_counter() - start


def load_data(config: ExperimentConfig) -> ds.Dataset:
    if config.preset is not None:
        return synthgen.generate(synthgen.PRESETS[config.preset](), config.seed)
    schema = ds.load_schema(config.schema)
    if config.sensitive_column is not None:
        schema = replace(schema, sensitive_column=config.sensitive_column)
    return ds.load_csv(config.data, schema)


def report_document(config_desc: dict, digest: str, model, data: ds.Dataset, cfs, fcfg: FairnessConfig,
                    data_summary: dict) -> dict:
    features, _, labels = ds.split(data)
    report = fairness.build_report(model, data, cfs, fcfg)
    return {
        "fairness": report.to_dict(),
        "accuracy": classifier.accuracy(model, features, labels) if len(labels) else None,
        "counterfactuals": {
            "generated": len(cfs),
            "invalid": sum(not cf.valid for cf in cfs),
        },
        "data": data_summary,
        "seeds": {"data": config_desc["seed"], "train": config_desc["train"]["seed"],
                  "ga": config_desc["ga"]["seed"]},
        "config": config_desc,
        "config_digest": digest,
    }


def run_experiment(config: ExperimentConfig) -> RunArtifacts:
    """Run every stage and write the artifacts into ``config.output_dir``.

    On failure the files this run created are removed and a
    :class:`StageError` naming the failed stage is raised.
    """
    timing: dict[str, float] = {}
    out = Path(config.output_dir)
    created: list[Path] = []
    made_dir = not out.exists()
    try:
        with _stage("config", timing):
            config.validate()
            out.mkdir(parents=True, exist_ok=True)
        with _stage("load", timing):
            data = load_data(config)
            n_loaded = len(data)
        with _stage("clean", timing):
            data, removed = ds.clean(data)
        with _stage("sample", timing):
            if config.sample_size is not None and config.sample_size < len(data):
                data = ds.sample(data, config.sample_size, config.seed)
        with _stage("train", timing):
            features, _, labels = ds.split(data)
            model = classifier.train(features, labels, config.train, feature_names=data.feature_names)
            log.info("training accuracy %.4f", classifier.accuracy(model, features, labels))
        with _stage("counterfactuals", timing):
            ga = config.ga
            if ga.feature_ranges is None:
                ga = replace(ga, feature_ranges=counterfactual.observed_ranges(features))
            cfs = counterfactual.generate_all(model, features, 0, ga, workers=config.workers)
        with _stage("report", timing):
            desc = config.describe()
            desc["ga"] = counterfactual.config_to_dict(ga)
            summary = {"loaded": n_loaded, "removed_by_clean": removed, "used": len(data)}
            doc = report_document(desc, config.digest(), model, data, cfs, config.fairness, summary)
        with _stage("emit", timing):
            writers = {
                "dataset": (ds.write_csv, data, DATASET_FILE),
                "schema": (ds.save_schema, data.schema, SCHEMA_FILE),
                "model": (classifier.save_model, model, MODEL_FILE),
                "counterfactuals": (counterfactual.write_counterfactuals, cfs, COUNTERFACTUAL_FILE),
                "report": (fairness.save_report, doc, REPORT_FILE),
            }
            paths = {}
            for key, (write, obj, name) in writers.items():
                created.append(out / name)
                paths[key] = write(obj, out / name)
            created.append(out / PLOT_FILE)
            plot = emit_plot(data, model, cfs, out / PLOT_FILE, plot_title(config.describe()))
            run_path = out / RUN_FILE
            created.append(run_path)
            run_path.write_text(json.dumps({
                "timing_seconds": timing,
                "artifacts": {k: (str(v) if v is not None else None) for k, v in {**paths, "plot": plot}.items()},
                "config_digest": config.digest(),
            }, indent=2) + "\n", encoding="utf-8")
    except StageError:
        for path in created:
            path.unlink(missing_ok=True)
        if made_dir and out.exists() and not any(out.iterdir()):
            out.rmdir()
        raise
    return RunArtifacts(paths["dataset"], paths["schema"], paths["model"], paths["counterfactuals"],
                        paths["report"], plot, run_path, timing, doc)


def plot_title(config_desc: dict) -> str:
    if config_desc.get("preset"):
        return f"preset {config_desc['preset']}"
    return Path(config_desc["data"]).name


def load_run(run_dir: str | Path):
    """Dataset, model and counterfactuals persisted by :func:`run_experiment`."""
    run_dir = Path(run_dir)
    schema = ds.load_schema(run_dir / SCHEMA_FILE)
    data = ds.load_csv(run_dir / DATASET_FILE, schema)
    model = classifier.load_model(run_dir / MODEL_FILE)
    cfs = counterfactual.read_counterfactuals(run_dir / COUNTERFACTUAL_FILE)
    return data, model, cfs


def rebuild_report(run_dir: str | Path) -> dict:
    """Recompute the report document from persisted artifacts, without rerunning the search."""
    run_dir = Path(run_dir)
    data, model, cfs = load_run(run_dir)
    old = json.loads((run_dir / REPORT_FILE).read_text(encoding="utf-8"))
    fcfg = old["config"]["fairness"]
    fcfg = FairnessConfig(tuple(fcfg["groups"]), fcfg["two_sided"], fcfg["threshold"])
    return report_document(old["config"], old["config_digest"], model, data, cfs, fcfg, old["data"])


def oracle_check(model, features: np.ndarray, config: GaConfig, target_class: int = 0) -> list[dict]:
    """GA distance against the closed-form projection for each target-class point."""
    if config.feature_ranges is None:
        config = replace(config, feature_ranges=counterfactual.observed_ranges(features))
    rows = []
    for cf in counterfactual.generate_all(model, features, target_class, config):
        oracle = counterfactual.oracle_projection(model, features[cf.origin_index], cf.origin_index)
        rows.append({
            "index": cf.origin_index,
            "ga": cf.distance if cf.valid else None,
            "oracle": oracle.distance,
            "ratio": cf.distance / oracle.distance if cf.valid else None,
        })
    return rows
