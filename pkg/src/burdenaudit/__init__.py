"""Counterfactual-based fairness auditing: Burden versus statistical parity."""

from burdenaudit.classifier import LinearModel, TrainConfig, train
from burdenaudit.counterfactual import Counterfactual, GaConfig, generate_all, generate_counterfactual
from burdenaudit.dataset import DataPoint, Dataset, FeatureSchema
from burdenaudit.fairness import FairnessReport, build_report

__all__ = [
    "Counterfactual",
    "DataPoint",
    "Dataset",
    "FairnessReport",
    "FeatureSchema",
    "GaConfig",
    "LinearModel",
    "TrainConfig",
    "build_report",
    "generate_all",
    "generate_counterfactual",
    "train",
]

__version__ = "0.1.0"
