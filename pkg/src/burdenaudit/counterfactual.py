"""Genetic search for nearest opposite-class counterfactuals.

For each datapoint ``x`` the search keeps a population of candidate points,
discards those the model puts in the same class as ``x``, ranks the rest by
fitness ``1 / d(x, c)`` and breeds the best of them with mutation and
crossover. The fittest candidate seen in any generation is returned.

Fresh candidates and mutated feature values are drawn uniformly from the
feature ranges intersected with the box ``x +/- d_best``, where ``d_best`` is
the incumbent distance. Any candidate outside that box is at least ``d_best``
away under both supported metrics, so the restriction discards nothing that
could improve the result; it only stops the sampler from wasting draws.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from burdenaudit.classifier import LinearModel, predict, score
from burdenaudit.dataset import Dataset, split

METRICS = ("euclidean", "manhattan")


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 60_000
    retained_after_selection: int = 10_000
    retained_for_next_generation: int = 5_000
    generations: int = 10
    mutation_probability: float = 0.2
    crossover_probability: float = 0.5
    # per-feature (min, max); None means the observed extent of the data
    feature_ranges: tuple[tuple[float, float], ...] | None = None
    distance_metric: str = "euclidean"
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.retained_for_next_generation <= self.retained_after_selection <= self.population_size):
            raise ValueError("need 0 < retained_for_next_generation <= retained_after_selection <= population_size")
        if self.generations <= 0:
            raise ValueError("generations must be positive")
        for p in (self.mutation_probability, self.crossover_probability):
            if not 0 <= p <= 1:
                raise ValueError(f"probability {p} outside [0, 1]")
        if self.distance_metric not in METRICS:
            raise ValueError(f"unknown distance metric {self.distance_metric!r}")
        if self.feature_ranges is not None:
            ranges = tuple((float(lo), float(hi)) for lo, hi in self.feature_ranges)
            if any(lo > hi for lo, hi in ranges):
                raise ValueError("feature range with min > max")
            object.__setattr__(self, "feature_ranges", ranges)

    @classmethod
    def paper(cls, **overrides) -> GaConfig:
        return cls(**overrides)

    @classmethod
    def desk(cls, **overrides) -> GaConfig:
        base = dict(population_size=600, retained_after_selection=100,
                    retained_for_next_generation=50, generations=10)
        return cls(**{**base, **overrides})


PROFILES = {"paper": GaConfig.paper, "desk": GaConfig.desk}


@dataclass
class Counterfactual:
    origin_index: int
    c_star: tuple[float, ...] | None
    distance: float
    generations_run: int
    valid: bool
    origin: tuple[float, ...] = ()
    # best fitness seen so far, one entry per generation
    fitness_trace: list[float] = field(default_factory=list, repr=False)


def distance(x, c, metric: str = "euclidean"):
    """Distance between ``x`` and ``c`` (or each row of ``c``)."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    if x.shape[-1] != c.shape[-1]:
        raise ValueError(f"length mismatch: {x.shape[-1]} vs {c.shape[-1]}")
    diff = c - x
    if metric == "euclidean":
        # scaled so tiny or huge differences neither underflow nor overflow
        scale = np.max(np.abs(diff), axis=-1, keepdims=True)
        safe = np.where(scale > 0, scale, 1.0)
        out = scale[..., 0] * np.sqrt(np.sum((diff / safe) ** 2, axis=-1))
    elif metric == "manhattan":
        out = np.sum(np.abs(diff), axis=-1)
    else:
        raise ValueError(f"unknown distance metric {metric!r}")
    return out if np.ndim(out) else float(out)


def fitness(x, c, metric: str = "euclidean"):
    """``1 / d(x, c)``; a candidate identical to ``x`` gets 0 and so never wins."""
    d = np.asarray(distance(x, c, metric), dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), 0.0)
    return out if np.ndim(out) else float(out)


def point_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one datapoint, hashed from (seed, index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def observed_ranges(features: np.ndarray) -> tuple[tuple[float, float], ...]:
    features = np.asarray(features, dtype=float)
    return tuple((float(lo), float(hi)) for lo, hi in zip(features.min(axis=0), features.max(axis=0)))


def mutate(pop: np.ndarray, lo: np.ndarray, hi: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """With probability ``p`` per individual, redraw one random feature uniformly in [lo, hi]."""
    n, d = pop.shape
    hit = rng.random(n) < p
    feats = rng.integers(0, d, size=n)
    vals = rng.uniform(lo[feats], hi[feats])
    out = pop.copy()
    rows = np.flatnonzero(hit)
    out[rows, feats[rows]] = vals[rows]
    return out


def crossover(pop: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Pair rank-adjacent individuals; with probability ``p`` swap each feature with probability 1/2."""
    n, d = pop.shape
    pairs = n // 2
    fire = rng.random(pairs) < p
    swap = (rng.random((pairs, d)) < 0.5) & fire[:, None]
    out = pop.copy()
    a, b = out[0:2 * pairs:2], out[1:2 * pairs:2]
    a_new = np.where(swap, b, a)
    b_new = np.where(swap, a, b)
    out[0:2 * pairs:2], out[1:2 * pairs:2] = a_new, b_new
    return out


def _rank(cands: np.ndarray, x: np.ndarray, model: LinearModel, origin_class: int, metric: str):
    """Opposite-class candidates at positive distance, nearest first (stable)."""
    if len(cands) == 0:
        return cands, np.empty(0)
    keep = predict(model, cands) != origin_class
    cands = cands[keep]
    d = np.atleast_1d(distance(x, cands, metric))
    pos = d > 0
    cands, d = cands[pos], d[pos]
    order = np.argsort(d, kind="stable")
    return cands[order], d[order]


def generate_counterfactual(model: LinearModel, x, config: GaConfig, origin_index: int = 0) -> Counterfactual:
    """Search for the nearest point the model classifies opposite to ``x``."""
    x = np.asarray(x, dtype=float)
    if config.feature_ranges is None:
        raise ValueError("feature_ranges must be set (generate_all fills them from the data)")
    ranges = np.asarray(config.feature_ranges, dtype=float)
    if ranges.shape != (len(x), 2):
        raise ValueError(f"need {len(x)} feature ranges, got {len(ranges)}")
    lo, hi = ranges[:, 0], ranges[:, 1]
    rng = point_rng(config.seed, origin_index)
    origin_class = predict(model, x)
    metric = config.distance_metric
    N = config.population_size
    R = config.retained_after_selection
    k = config.retained_for_next_generation

    elite = np.empty((0, len(x)))
    best, best_d = None, math.inf
    trace = []
    for _ in range(config.generations):
        if math.isfinite(best_d):
            blo, bhi = np.maximum(lo, x - best_d), np.minimum(hi, x + best_d)
        else:
            blo, bhi = lo, hi
        fresh = rng.uniform(blo, bhi, size=(N - len(elite), len(x)))
        pool, _ = _rank(np.vstack([elite, fresh]), x, model, origin_class, metric)
        pool = pool[:R]

        children = crossover(mutate(pool, blo, bhi, config.mutation_probability, rng),
                             config.crossover_probability, rng)
        ranked, d = _rank(np.vstack([pool, children]), x, model, origin_class, metric)
        ranked, d = ranked[:R], d[:R]
        elite = ranked[:k]
        if len(d) and d[0] < best_d:
            best, best_d = ranked[0].copy(), float(d[0])
        trace.append(1.0 / best_d if best is not None else 0.0)

    if best is None:
        return Counterfactual(origin_index, None, math.nan, config.generations, False, tuple(map(float, x)), trace)
    return Counterfactual(origin_index, tuple(map(float, best)), best_d, config.generations, True,
                          tuple(map(float, x)), trace)


def oracle_projection(model: LinearModel, x, origin_index: int = 0) -> Counterfactual:
    """Closed-form nearest opposite-class point for a linear model (euclidean).

    Projects ``x`` onto ``w.x + b = 0`` and steps ``eps`` past it, with
    ``eps = max(1e-6 * |w.x + b| / |w|, 1e-9)``.
    """
    x = np.asarray(x, dtype=float)
    w = model.w
    norm = float(np.linalg.norm(w))
    if norm == 0:
        raise ValueError("zero weight vector has no decision boundary")
    s = score(model, x)
    unit = w / norm
    eps = max(1e-6 * abs(s) / norm, 1e-9)
    origin_class = predict(model, x)
    direction = -1.0 if origin_class == 1 else 1.0
    foot = x - (s / norm) * unit
    c = foot + direction * eps * unit
    # rounding can leave the nudged point on the boundary for large coordinates
    while predict(model, c) == origin_class:
        eps *= 2
        c = foot + direction * eps * unit
    return Counterfactual(origin_index, tuple(map(float, c)), abs(s) / norm + eps, 0, True, tuple(map(float, x)))


def _job(args):
    model, x, config, index = args
    return generate_counterfactual(model, x, config, index)


def generate_all(model: LinearModel, dataset: Dataset | np.ndarray, target_class: int = 0,
                 config: GaConfig | None = None, workers: int = 1) -> list[Counterfactual]:
    """Counterfactuals for every point the model predicts as ``target_class``.

    Each point's search is seeded from ``(config.seed, row index)``, so the
    result does not depend on ``workers``.
    """
    config = config or GaConfig.desk()
    features = split(dataset)[0] if isinstance(dataset, Dataset) else np.asarray(dataset, dtype=float)
    if len(features) == 0:
        return []
    if config.feature_ranges is None:
        config = replace(config, feature_ranges=observed_ranges(features))
    preds = np.atleast_1d(predict(model, features))
    jobs = [(model, features[i], config, int(i)) for i in np.flatnonzero(preds == target_class)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_job(j) for j in jobs]


def counterfactual_to_dict(cf: Counterfactual) -> dict:
    return {
        "origin_index": cf.origin_index,
        "origin": list(cf.origin),
        "c_star": list(cf.c_star) if cf.c_star is not None else None,
        "distance": cf.distance if cf.valid else None,
        "valid": cf.valid,
        "generations_run": cf.generations_run,
    }


def counterfactual_from_dict(doc: dict) -> Counterfactual:
    return Counterfactual(
        origin_index=int(doc["origin_index"]),
        c_star=tuple(doc["c_star"]) if doc.get("c_star") is not None else None,
        distance=doc["distance"] if doc.get("distance") is not None else math.nan,
        generations_run=int(doc.get("generations_run", 0)),
        valid=bool(doc["valid"]),
        origin=tuple(doc.get("origin", ())),
    )


def write_counterfactuals(cfs: Sequence[Counterfactual], path: str | Path) -> Path:
    """One JSON record per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for cf in cfs:
            fh.write(json.dumps(counterfactual_to_dict(cf)) + "\n")
    return path


def read_counterfactuals(path: str | Path) -> list[Counterfactual]:
    with Path(path).open(encoding="utf-8") as fh:
        return [counterfactual_from_dict(json.loads(line)) for line in fh if line.strip()]


def config_to_dict(config: GaConfig) -> dict:
    doc = asdict(config)
    if config.feature_ranges is not None:
        doc["feature_ranges"] = [list(r) for r in config.feature_ranges]
    return doc
