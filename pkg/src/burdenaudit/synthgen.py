"""Gaussian-mixture synthetic datasets with two legitimate features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from burdenaudit.dataset import Column, DataPoint, Dataset, FeatureSchema


@dataclass(frozen=True)
class SyntheticRow:
    mu_x1: float
    mu_x2: float
    s: int
    y: int
    count: int


@dataclass(frozen=True)
class SyntheticSpec:
    rows: tuple[SyntheticRow, ...]
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(SyntheticRow(*r) if not isinstance(r, SyntheticRow) else r
                                               for r in self.rows))
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        for r in self.rows:
            if r.count <= 0:
                raise ValueError(f"row count must be positive, got {r.count}")
            if r.s not in (0, 1) or r.y not in (0, 1):
                raise ValueError("s and y must be 0 or 1")

    @property
    def size(self) -> int:
        return sum(r.count for r in self.rows)


def preset_DA() -> SyntheticSpec:
    """Equal acceptance rates, unequal distance to the boundary among the rejected."""
    return SyntheticSpec((
        SyntheticRow(1.0, 9.0, 0, 0, 20),
        SyntheticRow(3.5, 5.0, 1, 0, 20),
        SyntheticRow(9.0, 1.0, 0, 1, 20),
        SyntheticRow(9.0, 1.0, 1, 1, 20),
    ), sigma=1.0)


def preset_DB() -> SyntheticSpec:
    """Acceptance rates and boundary distances point at opposite groups."""
    return SyntheticSpec((
        SyntheticRow(1.0, 9.0, 1, 0, 15),
        SyntheticRow(3.5, 5.0, 0, 0, 15),
        SyntheticRow(9.0, 1.0, 1, 1, 30),
        SyntheticRow(9.0, 1.0, 0, 1, 20),
    ), sigma=1.0)


PRESETS = {"da": preset_DA, "db": preset_DB}


def synthetic_schema() -> FeatureSchema:
    return FeatureSchema((
        Column("x1"),
        Column("x2"),
        Column("s", "categorical", "sensitive", frozenset({0, 1})),
        Column("y", "categorical", "label", frozenset({0, 1})),
    ), favorable_label=1)


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal draws by inversion of the normal CDF.

    Each variate consumes one 53-bit integer from ``rng`` mapped to the open
    interval (0, 1) as ``(k + 0.5) / 2**53``, so results depend only on the
    PCG64 bit stream and not on numpy's ziggurat implementation.
    """
    k = rng.integers(0, 2**53, size=shape, dtype=np.int64)
    return ndtri((k + 0.5) / 2.0**53)


def generate(spec: SyntheticSpec, seed: int) -> Dataset:
    """Draw every spec row's points in row order with a PCG64 stream seeded by ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    points = []
    for row in spec.rows:
        z = standard_normal(rng, (row.count, 2))
        xs = np.array([row.mu_x1, row.mu_x2]) + spec.sigma * z
        points.extend(DataPoint((float(a), float(b)), row.s, row.y, {"s": row.s}) for a, b in xs)
    return Dataset(synthetic_schema(), tuple(points), favorable_label_raw=1)
