"""Tabular data model, CSV ingestion, domain cleaning and seeded sampling."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml

from burdenaudit.errors import DataError, SchemaError

log = logging.getLogger(__name__)

KINDS = ("continuous", "categorical")
ROLES = ("legitimate", "sensitive", "label")


@dataclass(frozen=True)
class Column:
    name: str
    kind: str = "continuous"
    role: str = "legitimate"
    valid_values: frozenset[float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in ROLES:
            raise SchemaError(f"column {self.name!r}: unknown role {self.role!r}")
        if self.kind == "categorical" and not self.valid_values:
            raise SchemaError(f"categorical column {self.name!r} needs a non-empty valid-values set")

    def admits(self, value: float) -> bool:
        return self.kind == "continuous" or value in self.valid_values


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered columns with their kind and role.

    ``sensitive_column`` picks which sensitive column becomes ``DataPoint.s``;
    it defaults to the first sensitive column. ``favorable_label`` is the raw
    label value that maps to the favorable outcome 1.
    """

    columns: tuple[Column, ...]
    favorable_label: float | None = None
    sensitive_column: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names in schema")
        roles = [c.role for c in self.columns]
        if roles.count("label") != 1:
            raise SchemaError("schema needs exactly one label column")
        if "sensitive" not in roles:
            raise SchemaError("schema needs at least one sensitive column")
        if "legitimate" not in roles:
            raise SchemaError("schema needs at least one legitimate column")
        if self.sensitive_column is not None:
            col = self.column(self.sensitive_column)
            if col.role != "sensitive":
                raise SchemaError(f"column {col.name!r} is not sensitive")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def legitimate(self) -> list[Column]:
        return [c for c in self.columns if c.role == "legitimate"]

    @property
    def sensitive(self) -> list[Column]:
        return [c for c in self.columns if c.role == "sensitive"]

    @property
    def label(self) -> Column:
        return next(c for c in self.columns if c.role == "label")

    @property
    def group_column(self) -> Column:
        if self.sensitive_column is None:
            return self.sensitive[0]
        return self.column(self.sensitive_column)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named {name!r}")


@dataclass(frozen=True)
class DataPoint:
    x: tuple[float, ...]
    s: int
    y: int
    # raw values of the sensitive columns, kept for domain cleaning
    attributes: dict[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.y not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.y!r}")


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    points: tuple[DataPoint, ...]
    favorable_label_raw: float = 1

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        width = len(self.schema.legitimate)
        for i, p in enumerate(self.points):
            if len(p.x) != width:
                raise DataError(f"point {i} has {len(p.x)} features, schema has {width}")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.schema.legitimate]

    @property
    def unfavorable_label_raw(self) -> float:
        return unfavorable_label(self.schema, self.favorable_label_raw)


def unfavorable_label(schema: FeatureSchema, favorable: float) -> float:
    values = schema.label.valid_values
    if values and len(values) == 2:
        (other,) = set(values) - {favorable}
        return other
    # continuous label column without a declared domain: assume 0/1 coding
    return 0 if favorable == 1 else 1


def map_label(raw: float, favorable: float, unfavorable: float) -> int:
    """Raw label to internal label (favorable -> 1)."""
    if raw == favorable:
        return 1
    if raw == unfavorable:
        return 0
    raise DataError(f"label value {raw!r} is neither favorable ({favorable!r}) nor unfavorable ({unfavorable!r})")


def unmap_label(y: int, favorable: float, unfavorable: float) -> float:
    return favorable if y == 1 else unfavorable


def _number(text: str) -> float | int:
    value = float(text)
    if math.isfinite(value) and value.is_integer() and "." not in text and "e" not in text.lower():
        return int(value)
    return value


def load_csv(path: str | Path, schema: FeatureSchema, favorable_label_raw: float | None = None) -> Dataset:
    """Read a headed CSV into a :class:`Dataset`, remapping labels so favorable is 1."""
    path = Path(path)
    if favorable_label_raw is None:
        favorable_label_raw = schema.favorable_label
    if favorable_label_raw is None:
        raise SchemaError("no favorable label given and none in schema")
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    unfavorable = unfavorable_label(schema, favorable_label_raw)
    legit = [c.name for c in schema.legitimate]
    sensitive = [c.name for c in schema.sensitive]
    group = schema.group_column.name
    label = schema.label.name

    points = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        if header != schema.names:
            raise DataError(f"{path}: header {header} does not match schema columns {schema.names}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
            values = {}
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "":
                    raise DataError(f"{path}: row {lineno}, column {name!r}: blank cell")
                try:
                    values[name] = _number(cell)
                except ValueError:
                    raise DataError(f"{path}: row {lineno}, column {name!r}: non-numeric value {cell!r}") from None
                if not math.isfinite(values[name]):
                    raise DataError(f"{path}: row {lineno}, column {name!r}: non-finite value {cell!r}")
            s = values[group]
            if float(s) != int(s):
                raise DataError(f"{path}: row {lineno}, column {group!r}: sensitive code must be an integer")
            try:
                y = map_label(values[label], favorable_label_raw, unfavorable)
            except DataError as exc:
                raise DataError(f"{path}: row {lineno}, column {label!r}: {exc}") from None
            points.append(DataPoint(
                x=tuple(float(values[n]) for n in legit),
                s=int(s),
                y=y,
                attributes={n: values[n] for n in sensitive},
            ))
    return Dataset(schema, tuple(points), favorable_label_raw)


def write_csv(dataset: Dataset, path: str | Path) -> Path:
    """Write ``dataset`` with raw labels; sensitive columns other than the group column need attributes."""
    path = Path(path)
    schema = dataset.schema
    fav, unfav = dataset.favorable_label_raw, dataset.unfavorable_label_raw
    group = schema.group_column.name
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(schema.names)
        for p in dataset.points:
            legit = iter(p.x)
            row = []
            for c in schema.columns:
                if c.role == "legitimate":
                    row.append(repr(next(legit)))
                elif c.role == "label":
                    row.append(_fmt(unmap_label(p.y, fav, unfav)))
                elif c.name == group:
                    row.append(str(p.s))
                else:
                    row.append(_fmt(p.attributes[c.name]))
            writer.writerow(row)
    return path


def _fmt(value) -> str:
    return str(value) if isinstance(value, int) else repr(value)


def clean(dataset: Dataset) -> tuple[Dataset, int]:
    """Drop points with a categorical value outside its column's valid set.

    Continuous columns are never filtered. Returns the cleaned dataset and the
    number of removed points.
    """
    schema = dataset.schema
    legit = schema.legitimate
    label = schema.label
    kept = []
    for p in dataset.points:
        ok = all(c.admits(v) for c, v in zip(legit, p.x))
        ok = ok and all(c.admits(p.attributes.get(c.name, p.s)) for c in schema.sensitive)
        if ok and label.kind == "categorical":
            raw = unmap_label(p.y, dataset.favorable_label_raw, dataset.unfavorable_label_raw)
            ok = label.admits(raw)
        if ok:
            kept.append(p)
    removed = len(dataset.points) - len(kept)
    if removed:
        log.info("clean: removed %d of %d points with out-of-domain categorical values", removed, len(dataset))
    return replace(dataset, points=tuple(kept)), removed


def sample(dataset: Dataset, n: int, seed: int) -> Dataset:
    """Uniform sample of ``n`` points without replacement, in sampled order.

    Uses numpy's PCG64 generator seeded with ``seed``; the first ``n`` entries
    of a random permutation are taken.
    """
    if n < 0 or n > len(dataset):
        raise DataError(f"cannot sample {n} points from a dataset of {len(dataset)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(dataset))[:n]
    return replace(dataset, points=tuple(dataset.points[i] for i in order))


def split(dataset: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Feature matrix (legitimate columns only), sensitive codes and labels, row-aligned."""
    width = len(dataset.schema.legitimate)
    features = np.array([p.x for p in dataset.points], dtype=float).reshape(len(dataset), width)
    sensitive = np.array([p.s for p in dataset.points], dtype=int)
    labels = np.array([p.y for p in dataset.points], dtype=int)
    return features, sensitive, labels


def schema_to_dict(schema: FeatureSchema) -> dict:
    columns = []
    for c in schema.columns:
        entry = {"name": c.name, "kind": c.kind, "role": c.role}
        if c.valid_values is not None:
            entry["values"] = sorted(c.valid_values)
        columns.append(entry)
    out = {"columns": columns}
    if schema.favorable_label is not None:
        out["favorable_label"] = schema.favorable_label
    if schema.sensitive_column is not None:
        out["sensitive_column"] = schema.sensitive_column
    return out


def schema_from_dict(doc: dict) -> FeatureSchema:
    try:
        columns = tuple(
            Column(
                name=str(c["name"]),
                kind=c.get("kind", "continuous"),
                role=c.get("role", "legitimate"),
                valid_values=frozenset(c["values"]) if c.get("values") is not None else None,
            )
            for c in doc["columns"]
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed schema document: {exc}") from None
    return FeatureSchema(columns, doc.get("favorable_label"), doc.get("sensitive_column"))


def load_schema(path: str | Path) -> FeatureSchema:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"{path}: no such schema file")
    with path.open(encoding="utf-8") as fh:
        return schema_from_dict(yaml.safe_load(fh))


def save_schema(schema: FeatureSchema, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(yaml.safe_dump(schema_to_dict(schema), sort_keys=False), encoding="utf-8")
    return path


def from_arrays(schema: FeatureSchema, features: Sequence[Sequence[float]], sensitive: Iterable[int],
                labels: Iterable[int], favorable_label_raw: float = 1) -> Dataset:
    group = schema.group_column.name
    points = tuple(
        DataPoint(tuple(float(v) for v in x), int(s), int(y), {group: int(s)})
        for x, s, y in zip(features, sensitive, labels)
    )
    return Dataset(schema, points, favorable_label_raw)
