from burdenaudit.harness.pipeline import ExperimentConfig, RunArtifacts, rebuild_report, run_experiment
from burdenaudit.harness.plot import emit_plot

__all__ = ["ExperimentConfig", "RunArtifacts", "emit_plot", "rebuild_report", "run_experiment"]
