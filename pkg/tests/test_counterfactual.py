import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from burdenaudit import classifier as clf, counterfactual as cfm
from burdenaudit.classifier import LinearModel
from burdenaudit.counterfactual import GaConfig

DIAG = LinearModel((1.0, -1.0), 0.0)
BOX = ((-5.0, 5.0), (-5.0, 5.0))


def test_distance_examples():
    assert cfm.distance((0, 0), (3, 4)) == 5.0
    assert cfm.distance((1, 9), (5, 5), "manhattan") == 8.0
    for metric in cfm.METRICS:
        assert cfm.distance((2.5, -1), (2.5, -1), metric) == 0.0
    with pytest.raises(ValueError):
        cfm.distance((1, 2), (1, 2, 3))
    with pytest.raises(ValueError):
        cfm.distance((1, 2), (1, 2), "chebyshev")


vec = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3)


@given(vec, vec, st.sampled_from(cfm.METRICS))
def test_distance_symmetric_and_zero_iff_equal(x, c, metric):
    assert cfm.distance(x, c, metric) == cfm.distance(c, x, metric)
    assert (cfm.distance(x, c, metric) == 0) == (x == c)


def test_fitness_is_reciprocal():
    assert cfm.fitness((0, 0), (2, 0)) == 0.5
    assert cfm.fitness((0, 0), (0, 0.25)) == 4.0
    assert cfm.fitness((1, 1), (1, 1)) == 0.0
    assert cfm.fitness((0, 0), (1, 0)) > cfm.fitness((0, 0), (1.0001, 0))


def test_ga_diagonal_example():
    cfg = GaConfig.desk(feature_ranges=BOX, seed=3)
    cf = cfm.generate_counterfactual(DIAG, (0.0, 2.0), cfg)
    assert cf.valid and clf.predict(DIAG, cf.c_star) == 1
    assert math.sqrt(2) <= cf.distance <= 1.10 * math.sqrt(2)
    assert cf.distance == pytest.approx(cfm.distance((0.0, 2.0), cf.c_star))


def test_invalid_when_no_opposite_class_in_range():
    # the whole box lies on the unfavorable side of x1 - x2 = 0
    cfg = GaConfig.desk(feature_ranges=((-5.0, -1.0), (0.0, 5.0)), generations=3)
    cf = cfm.generate_counterfactual(DIAG, (-2.0, 2.0), cfg)
    assert not cf.valid and cf.c_star is None and math.isnan(cf.distance)


def test_config_invariants():
    with pytest.raises(ValueError):
        GaConfig(population_size=10, retained_after_selection=20, retained_for_next_generation=5)
    with pytest.raises(ValueError):
        GaConfig.desk(mutation_probability=1.5)
    with pytest.raises(ValueError):
        GaConfig.desk(feature_ranges=((1.0, 0.0),))
    paper = GaConfig.paper()
    assert (paper.population_size, paper.retained_after_selection, paper.retained_for_next_generation,
            paper.generations) == (60_000, 10_000, 5_000, 10)
    desk = GaConfig.desk()
    assert (desk.population_size, desk.retained_after_selection, desk.retained_for_next_generation,
            desk.generations) == (600, 100, 50, 10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4), st.integers(0, 2**31 - 1),
       st.sampled_from(cfm.METRICS), st.floats(0, 1), st.floats(0, 1))
def test_search_invariants(x1, x2, seed, metric, pm, pc):
    cfg = GaConfig.desk(feature_ranges=BOX, seed=seed, distance_metric=metric,
                        mutation_probability=pm, crossover_probability=pc, generations=5)
    x = (x1, x2)
    cf = cfm.generate_counterfactual(DIAG, x, cfg)
    assert cf.valid
    assert clf.predict(DIAG, cf.c_star) != clf.predict(DIAG, x)
    assert all(lo <= v <= hi for v, (lo, hi) in zip(cf.c_star, BOX))
    assert cf.distance == cfm.distance(x, cf.c_star, metric)
    assert all(b >= a for a, b in zip(cf.fitness_trace, cf.fitness_trace[1:]))
    assert len(cf.fitness_trace) == cf.generations_run == 5


def test_seed_determinism():
    cfg = GaConfig.desk(feature_ranges=BOX, seed=99)
    a = cfm.generate_counterfactual(DIAG, (0.5, 3.0), cfg, origin_index=4)
    b = cfm.generate_counterfactual(DIAG, (0.5, 3.0), cfg, origin_index=4)
    assert a.c_star == b.c_star and a.fitness_trace == b.fitness_trace


def test_mutation_stays_in_bounds_and_touches_one_feature():
    rng = np.random.default_rng(0)
    pop = np.zeros((200, 4))
    lo, hi = np.full(4, 1.0), np.full(4, 2.0)
    out = cfm.mutate(pop, lo, hi, 1.0, rng)
    changed = (out != pop).sum(axis=1)
    assert (changed == 1).all()
    assert ((out == 0) | ((out >= 1) & (out <= 2))).all()
    assert (cfm.mutate(pop, lo, hi, 0.0, rng) == pop).all()


def test_crossover_swaps_between_adjacent_pairs():
    rng = np.random.default_rng(1)
    pop = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [3.0, 3.0, 3.0], [9.0, 9.0, 9.0]])
    out = cfm.crossover(pop, 1.0, rng)
    # column multiset preserved within each pair; odd individual untouched
    for i in (0, 2):
        assert sorted(out[i:i + 2].ravel()) == sorted(pop[i:i + 2].ravel())
        assert (np.sort(out[i:i + 2], axis=0) == np.sort(pop[i:i + 2], axis=0)).all()
    assert (out[4] == pop[4]).all()
    assert (cfm.crossover(pop, 0.0, rng) == pop).all()


def test_oracle_examples():
    m = LinearModel((0.0, 1.0), 0.0)
    cf = cfm.oracle_projection(m, (5.0, 3.0))
    assert cf.c_star[0] == pytest.approx(5.0) and -1e-5 < cf.c_star[1] < 0
    assert cf.distance == pytest.approx(3.0, rel=1e-5)
    assert clf.predict(m, cf.c_star) == 0

    on = cfm.oracle_projection(DIAG, (2.0, 2.0))
    assert on.distance == pytest.approx(1e-9)
    assert np.allclose(on.c_star, (2.0, 2.0)) and clf.predict(DIAG, on.c_star) == 0
    with pytest.raises(ValueError):
        cfm.oracle_projection(LinearModel((0.0, 0.0), 1.0), (1.0, 1.0))


@given(st.tuples(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4)))
def test_oracle_always_flips_class(x):
    cf = cfm.oracle_projection(LinearModel((0.3, -1.7), 12.5), x)
    assert clf.predict(LinearModel((0.3, -1.7), 12.5), cf.c_star) != clf.predict(LinearModel((0.3, -1.7), 12.5), x)


def test_oracle_never_beaten(preset_run, preset):
    _, X, _, _, m = preset_run(preset)
    for cf in cfm.generate_all(m, X, 0, GaConfig.desk(seed=1)):
        assert cfm.oracle_projection(m, X[cf.origin_index]).distance <= cf.distance


@pytest.mark.parametrize("name, expected", [("da", 40), ("db", 30)])
def test_generate_all_counts(preset_run, name, expected):
    _, X, _, Y, m = preset_run(name)
    cfs = cfm.generate_all(m, X, 0, GaConfig.desk(seed=5))
    assert len(cfs) == expected
    assert sorted(cf.origin_index for cf in cfs) == np.flatnonzero(Y == 0).tolist()
    assert all(cf.valid for cf in cfs)


def test_generate_all_empty_match():
    m = LinearModel((1.0, 0.0), 100.0)
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert cfm.generate_all(m, X, 0, GaConfig.desk()) == []
    assert cfm.generate_all(m, np.empty((0, 2)), 0) == []


def test_parallel_matches_serial(preset_run):
    _, X, _, _, m = preset_run("db")
    cfg = GaConfig.desk(seed=17)
    serial = cfm.generate_all(m, X, 0, cfg)
    parallel = cfm.generate_all(m, X, 0, cfg, workers=3)
    assert [(c.origin_index, c.c_star, c.distance) for c in serial] == \
        [(c.origin_index, c.c_star, c.distance) for c in parallel]


def test_dump_round_trip(tmp_path, preset_run):
    _, X, _, _, m = preset_run("da")
    cfs = cfm.generate_all(m, X, 0, GaConfig.desk(seed=2))
    cfs.append(cfm.Counterfactual(99, None, math.nan, 10, False, (1.0, 2.0)))
    back = cfm.read_counterfactuals(cfm.write_counterfactuals(cfs, tmp_path / "cf.jsonl"))
    assert len(back) == len(cfs)
    for a, b in zip(cfs, back):
        assert (a.origin_index, a.c_star, a.valid, a.origin) == (b.origin_index, b.c_star, b.valid, b.origin)
        assert a.distance == b.distance or (math.isnan(a.distance) and math.isnan(b.distance))
