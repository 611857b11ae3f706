"""Acceptance rate, statistical parity, the 80% rule and Burden."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from burdenaudit.classifier import LinearModel, predict
from burdenaudit.counterfactual import Counterfactual
from burdenaudit.dataset import Dataset, split
from burdenaudit.errors import UndefinedMetricError


def acceptance_rate(predictions, groups, s) -> float:
    """Share of group ``s`` predicted favorable."""
    predictions = np.asarray(predictions)
    members = np.asarray(groups) == s
    if not members.any():
        raise UndefinedMetricError(f"group {s!r} is empty; acceptance rate undefined")
    return float(np.mean(predictions[members] == 1))


def statistical_parity(predictions, groups, group0=0, group1=1) -> float:
    """AR(group0) / AR(group1)."""
    denominator = acceptance_rate(predictions, groups, group1)
    if denominator == 0:
        raise UndefinedMetricError(f"acceptance rate of group {group1!r} is 0; statistical parity undefined")
    return acceptance_rate(predictions, groups, group0) / denominator


def disparate_impact(sp: float, two_sided: bool = True, threshold: float = 0.8) -> bool:
    """The 80% rule, inclusive at the threshold.

    Two-sided by default: ``min(sp, 1/sp) <= threshold``, so the verdict does
    not depend on which group is in the numerator.
    """
    if sp < 0:
        raise ValueError("statistical parity cannot be negative")
    if not two_sided or sp == 0:
        return sp <= threshold
    return min(sp, 1.0 / sp) <= threshold


def _group_distances(counterfactuals: Sequence[Counterfactual], groups, predictions, s):
    groups = np.asarray(groups)
    predictions = np.asarray(predictions)
    valid, invalid = [], 0
    for cf in counterfactuals:
        i = cf.origin_index
        if groups[i] != s or predictions[i] != 0:
            continue
        if cf.valid:
            valid.append(cf.distance)
        else:
            invalid += 1
    return valid, invalid


def burden(counterfactuals: Sequence[Counterfactual], groups, predictions, s) -> float:
    """Mean counterfactual distance over group ``s`` members predicted unfavorable.

    Invalid counterfactuals are left out of the mean.
    """
    distances, invalid = _group_distances(counterfactuals, groups, predictions, s)
    if not distances:
        why = f"{invalid} invalid counterfactuals" if invalid else "no negatively predicted members"
        raise UndefinedMetricError(f"burden undefined for group {s!r}: {why}")
    return math.fsum(distances) / len(distances)


def burden_ratio(burden0: float | None, burden1: float | None) -> float:
    if burden0 is None or burden1 is None:
        raise UndefinedMetricError("burden ratio needs both group burdens")
    if burden1 == 0:
        raise UndefinedMetricError("denominator burden is 0; burden ratio undefined")
    return burden0 / burden1


@dataclass(frozen=True)
class FairnessConfig:
    groups: tuple[int, int] = (0, 1)
    two_sided: bool = True
    threshold: float = 0.8


@dataclass
class GroupCounts:
    total: int
    positives: int
    negatives: int
    invalid_counterfactuals: int


@dataclass
class FairnessReport:
    """Fairness figures for one model; undefined metrics are None with a reason in ``undefined``."""

    groups: tuple[int, int]
    acceptance_rate_by_group: dict[int, float | None]
    statistical_parity: float | None
    disparate_impact: bool | None
    burden_by_group: dict[int, float | None]
    burden_ratio: float | None
    counts: dict[int, GroupCounts]
    undefined: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = asdict(self)
        # JSON object keys must be strings
        for key in ("acceptance_rate_by_group", "burden_by_group", "counts"):
            doc[key] = {str(k): v for k, v in doc[key].items()}
        doc["groups"] = list(self.groups)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> FairnessReport:
        return cls(
            groups=tuple(doc["groups"]),
            acceptance_rate_by_group={int(k): v for k, v in doc["acceptance_rate_by_group"].items()},
            statistical_parity=doc["statistical_parity"],
            disparate_impact=doc["disparate_impact"],
            burden_by_group={int(k): v for k, v in doc["burden_by_group"].items()},
            burden_ratio=doc["burden_ratio"],
            counts={int(k): GroupCounts(**v) for k, v in doc["counts"].items()},
            undefined=dict(doc.get("undefined", {})),
        )


def build_report(model: LinearModel, dataset: Dataset | tuple, counterfactuals: Sequence[Counterfactual],
                 config: FairnessConfig = FairnessConfig()) -> FairnessReport:
    """Evaluate every metric, recording undefined ones instead of raising.

    ``dataset`` may be a :class:`Dataset` or a ``(features, sensitive)`` pair.
    """
    if isinstance(dataset, Dataset):
        features, groups, _ = split(dataset)
    else:
        features, groups = (np.asarray(a) for a in dataset)
    predictions = np.atleast_1d(predict(model, features)) if len(features) else np.empty(0, int)
    g0, g1 = config.groups
    undefined = {}

    def attempt(name, fn, *args):
        try:
            return fn(*args)
        except UndefinedMetricError as exc:
            undefined[name] = str(exc)
            return None

    ars = {s: attempt(f"acceptance_rate[{s}]", acceptance_rate, predictions, groups, s) for s in (g0, g1)}
    sp = None
    if ars[g0] is not None and ars[g1] is not None:
        if ars[g1] == 0:
            undefined["statistical_parity"] = f"acceptance rate of group {g1} is 0"
        else:
            sp = ars[g0] / ars[g1]
    else:
        undefined["statistical_parity"] = "a group is empty"
    di = disparate_impact(sp, config.two_sided, config.threshold) if sp is not None else None

    burdens = {s: attempt(f"burden[{s}]", burden, counterfactuals, groups, predictions, s) for s in (g0, g1)}
    ratio = attempt("burden_ratio", burden_ratio, burdens[g0], burdens[g1])

    counts = {}
    for s in (g0, g1):
        members = groups == s
        _, invalid = _group_distances(counterfactuals, groups, predictions, s)
        positives = int(np.sum(predictions[members] == 1))
        counts[s] = GroupCounts(int(members.sum()), positives, int(members.sum()) - positives, invalid)
    return FairnessReport((g0, g1), ars, sp, di, burdens, ratio, counts, undefined)


def save_report(doc: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
