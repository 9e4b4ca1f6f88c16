import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kstest

from eyeopt.evolution import (
    Categorical,
    Continuous,
    GaParams,
    Integer,
    SearchSpace,
    crossover,
    evolve_candidates,
    mutate,
    sample_uniform,
    select_parents,
)

MIXED = SearchSpace(
    (
        Categorical("batch_size", (8, 16, 32, 64)),
        Integer("epochs", 10, 100),
        Continuous("lr", 1e-5, 1e-2, log=True),
        Continuous("dropout", 0.0, 0.5),
    )
)


def _rng(seed=0):
    return np.random.default_rng(seed)


# --- space ----------------------------------------------------------------------


def test_space_validation():
    with pytest.raises(ValueError):
        Continuous("x", 1.0, 1.0)
    with pytest.raises(ValueError):
        Continuous("x", 0.0, 1.0, log=True)
    with pytest.raises(ValueError):
        Integer("n", 5, 2)
    with pytest.raises(ValueError):
        Categorical("c", ())
    with pytest.raises(ValueError):
        SearchSpace((Continuous("x", 0, 1), Continuous("x", 0, 2)))


def test_unit_embedding():
    u = MIXED.to_unit((32, 10, 1e-2, 0.25))
    assert MIXED.unit_dim == 7
    np.testing.assert_allclose(u, [0, 0, 1 / math.sqrt(2), 0, 0.0, 1.0, 0.5], atol=1e-15)
    # two different categories sit at unit distance
    a, b = MIXED.to_unit((8, 10, 1e-3, 0.1)), MIXED.to_unit((16, 10, 1e-3, 0.1))
    assert np.linalg.norm(a - b) == pytest.approx(1.0)


def test_validate():
    assert MIXED.validate((8, 50, 1e-3, 0.2)) == (8, 50, 1e-3, 0.2)
    with pytest.raises(ValueError):
        MIXED.validate((12, 50, 1e-3, 0.2))
    with pytest.raises(ValueError):
        MIXED.validate((8, 50, 1e-3))


# --- sampling -------------------------------------------------------------------


def test_sample_single_choice():
    space = SearchSpace((Categorical("c", ("only",)),))
    rng = _rng()
    assert all(sample_uniform(space, rng) == ("only",) for _ in range(50))


def test_sample_mean_unit_interval():
    space = SearchSpace((Continuous("x", 0.0, 1.0),))
    rng = _rng(1)
    xs = np.array([sample_uniform(space, rng)[0] for _ in range(10_000)])
    assert abs(xs.mean() - 0.5) <= 0.02


def test_sample_log_uniform_ks():
    space = SearchSpace((Continuous("lr", 1e-5, 1e-2, log=True),))
    rng = _rng(2)
    logs = np.log10([sample_uniform(space, rng)[0] for _ in range(10_000)])
    assert logs.min() >= -5 and logs.max() <= -2
    assert kstest(logs, "uniform", args=(-5, 3)).pvalue > 0.01


def test_sample_integer_inclusive():
    space = SearchSpace((Integer("n", 1, 4),))
    rng = _rng(3)
    seen = {sample_uniform(space, rng)[0] for _ in range(500)}
    assert seen == {1, 2, 3, 4}


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_sample_in_domain(seed):
    rng = _rng(seed)
    for _ in range(20):
        assert MIXED.contains(sample_uniform(MIXED, rng))


# --- selection ------------------------------------------------------------------


POP5 = [(("a",), 0.1), (("b",), 0.7), (("c",), 0.3), (("d",), 0.9), (("e",), 0.5)]


def test_select_single():
    assert select_parents([(("x",), 1.0)], 3, _rng()) == (("x",), ("x",))


def test_select_full_tournament():
    rng = _rng(4)
    for _ in range(20):
        assert select_parents(POP5, 5, rng) == (("d",), ("d",))


def test_select_ties_earliest():
    pop = [(("p",), 1.0), (("q",), 1.0), (("r",), 1.0)]
    assert select_parents(pop, 3, _rng()) == (("p",), ("p",))


def test_select_golden():
    # recorded from a seeded run
    assert select_parents(POP5, 2, _rng(3)) == (("d",), ("e",))
    assert select_parents(POP5, 2, _rng(0)) == (("d",), ("b",))


def test_select_empty():
    with pytest.raises(ValueError):
        select_parents([], 3, _rng())


# --- crossover and mutation -----------------------------------------------------


def test_crossover_identical_parents():
    a = (8, 20, 1e-3, 0.1)
    assert crossover(a, a, 1.0, _rng()) == a


def test_crossover_pc0_copies_a():
    rng = _rng(5)
    a, b = (8, 20, 1e-3, 0.1), (64, 90, 1e-4, 0.4)
    assert all(crossover(a, b, 0.0, rng) == a for _ in range(100))


def test_crossover_membership():
    rng = _rng(6)
    a, b = (8, 20, 1e-3, 0.1), (64, 90, 1e-4, 0.4)
    mixed = False
    for _ in range(1000):
        child = crossover(a, b, 1.0, rng)
        assert all(g in (x, y) for g, x, y in zip(child, a, b))
        mixed |= child not in (a, b)
    assert mixed


def test_crossover_mismatch():
    with pytest.raises(ValueError):
        crossover((1, 2), (1, 2, 3), 1.0, _rng())


def test_mutate_pm0_identity():
    rng = _rng(7)
    c = (16, 40, 2e-4, 0.3)
    assert all(mutate(MIXED, c, 0.0, 0.1, rng) == c for _ in range(100))


def test_mutate_binary_categorical_flips():
    space = SearchSpace((Categorical("c", ("x", "y")),))
    rng = _rng(8)
    assert all(mutate(space, ("x",), 1.0, 0.1, rng) == ("y",) for _ in range(100))


def test_mutate_categorical_never_stays():
    space = SearchSpace((Categorical("c", (1, 2, 3, 4)),))
    rng = _rng(9)
    outs = {mutate(space, (2,), 1.0, 0.1, rng)[0] for _ in range(300)}
    assert outs == {1, 3, 4}


def test_mutate_gaussian_std():
    space = SearchSpace((Continuous("x", 0.0, 1.0),))
    rng = _rng(10)
    xs = np.array([mutate(space, (0.5,), 1.0, 0.1, rng)[0] for _ in range(10_000)])
    assert abs(xs.std() - 0.1) <= 0.01
    assert abs(xs.mean() - 0.5) <= 0.01


def test_mutate_log_space():
    space = SearchSpace((Continuous("lr", 1e-5, 1e-2, log=True),))
    rng = _rng(11)
    logs = np.log10([mutate(space, (1e-4,), 1.0, 0.1, rng)[0] for _ in range(10_000)])
    # sigma 0.1 of a 3-decade range, centred on -4
    assert abs(logs.std() - 0.3) <= 0.03
    assert abs(logs.mean() + 4) <= 0.02


def test_mutate_integer_rounds_and_clamps():
    space = SearchSpace((Integer("n", 0, 10),))
    rng = _rng(12)
    for _ in range(500):
        (v,) = mutate(space, (10,), 1.0, 0.5, rng)
        assert isinstance(v, int) and 0 <= v <= 10


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.floats(0.01, 2))
def test_operators_preserve_domain(seed, pm, sigma):
    rng = _rng(seed)
    a, b = sample_uniform(MIXED, rng), sample_uniform(MIXED, rng)
    child = mutate(MIXED, crossover(a, b, 0.9, rng), pm, sigma, rng)
    assert MIXED.contains(child)


def test_ga_params_validation():
    for kw in ({"pc": 1.5}, {"pm": -0.1}, {"pool_size": 0}, {"tournament_k": 0}, {"mutation_sigma": 0}):
        with pytest.raises(ValueError):
            GaParams(**kw)


# --- pool -----------------------------------------------------------------------


def _history(n, seed=13):
    rng = _rng(seed)
    return [(sample_uniform(MIXED, rng), float(rng.normal())) for _ in range(n)]


def test_evolve_single_point_copies():
    h = [((16, 40, 2e-4, 0.3), 1.0)]
    pool = evolve_candidates(MIXED, h, GaParams(pc=0, pm=0, pool_size=7), _rng())
    assert pool == [h[0][0]] * 7


def test_evolve_no_invention_without_operators():
    h = _history(30)
    pool = evolve_candidates(MIXED, h, GaParams(pc=0, pm=0, pool_size=40), _rng(1))
    known = {c for c, _ in h}
    assert all(c in known for c in pool)


def test_evolve_elite_only():
    h = _history(40)
    pool = evolve_candidates(MIXED, h, GaParams(pc=0, pm=0, pool_size=200), _rng(2))
    elite = {c for c, _ in sorted(h, key=lambda r: -r[1])[:20]}
    assert set(pool) <= elite


def test_evolve_domain_and_size():
    h = _history(25)
    pool = evolve_candidates(MIXED, h, GaParams(pool_size=60), _rng(3))
    assert len(pool) == 60
    assert all(MIXED.contains(c) for c in pool)


def test_evolve_avoids_duplicates():
    h = _history(25)
    pool = evolve_candidates(MIXED, h, GaParams(pool_size=100, pm=0.5), _rng(4))
    known = {c for c, _ in h}
    assert sum(c in known for c in pool) == 0


def test_evolve_deterministic():
    h = _history(25)
    a = evolve_candidates(MIXED, h, GaParams(), _rng(99))
    b = evolve_candidates(MIXED, h, GaParams(), _rng(99))
    assert a == b


def test_evolve_empty_history():
    with pytest.raises(ValueError):
        evolve_candidates(MIXED, [], GaParams(), _rng())
