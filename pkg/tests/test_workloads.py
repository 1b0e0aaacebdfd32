import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sortbench.bench import NORMALIZED_BETA
from sortbench.engine import ArrayState, NaiveSequential, new_strategy, run
from sortbench.errors import InvalidSpec
from sortbench.metrics import cost
from sortbench.params import derive_top
from sortbench.rng import XorShift64Star, splitmix64
from sortbench.workloads import (
    WORKLOADS,
    MidpointAdversary,
    WorkloadSpec,
    generate,
    incremental_cost,
    midpoint_adversary_next,
)

OBLIVIOUS = [w for w in WORKLOADS if w != "midpoint_adversary"]


def _np_xorshift(seed, count):
    # independent uint64 implementation of the documented generator
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        x = z ^ (z >> np.uint64(31))
        if x == 0:
            x = np.uint64(0x9E3779B97F4A7C15)
        out = []
        for _ in range(count):
            x ^= x >> np.uint64(12)
            x ^= x << np.uint64(25)
            x ^= x >> np.uint64(27)
            out.append(int(x * np.uint64(0x2545F4914F6CDD1D)))
    return out


@pytest.mark.parametrize("seed", [0, 1, 42, 2**63 + 5, 2**64 - 1])
def test_rng_matches_uint64_reference(seed):
    rng = XorShift64Star(seed)
    assert [rng.next_u64() for _ in range(50)] == _np_xorshift(seed, 50)


def test_rng_float_range_and_splitmix():
    rng = XorShift64Star(7)
    xs = [rng.random() for _ in range(2000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    assert 0.45 < sum(xs) / len(xs) < 0.55
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_randbelow_is_in_range_and_covers():
    rng = XorShift64Star(3)
    seen = {rng.randbelow(7) for _ in range(500)}
    assert seen == set(range(7))


def test_sorted_asc_example():
    assert generate(WorkloadSpec("sorted_asc", 4)) == [0.0, 1 / 3, 2 / 3, 1.0]


def test_sorted_desc_reverses():
    assert generate(WorkloadSpec("sorted_desc", 4)) == [1.0, 2 / 3, 1 / 3, 0.0]


def test_uniform_is_deterministic():
    a = generate(WorkloadSpec("uniform", 3, seed=42))
    assert a == generate(WorkloadSpec("uniform", 3, seed=42))
    assert a != generate(WorkloadSpec("uniform", 3, seed=43))


def test_interval_flood_example():
    xs = generate(WorkloadSpec("interval_flood", 9, params={"flood_width": 0.01}))
    assert xs[:3] == [0.0, 0.5, 1.0]
    tail = xs[3:]
    assert len(tail) == 6 and max(tail) - min(tail) <= 0.01


def test_two_cluster_alternates():
    xs = generate(WorkloadSpec("two_cluster", 101, seed=5, params={"gap": 0.2}))
    assert all(x < 0.4 for x in xs[0::2])
    assert all(0.6 <= x < 1.0 for x in xs[1::2])


def test_sawtooth_values():
    xs = generate(WorkloadSpec("sawtooth", 5))
    phi = (math.sqrt(5) - 1) / 2
    assert xs == [(t * phi) % 1.0 for t in range(5)]
    assert xs[0] == 0.0


@pytest.mark.parametrize("name", OBLIVIOUS)
@pytest.mark.parametrize("n", [1, 2, 17, 1000])
def test_oblivious_streams_range_and_determinism(name, n):
    spec = WorkloadSpec(name, n, seed=9)
    xs = generate(spec)
    assert len(xs) == n
    assert all(0.0 <= x <= 1.0 for x in xs)
    assert all(x < NORMALIZED_BETA for x in xs)
    if name not in ("sorted_asc", "sorted_desc", "interval_flood"):
        assert all(x < 1.0 for x in xs)
    assert xs == generate(spec)


@pytest.mark.parametrize("n", [2, 10, 1000])
def test_sorted_workloads_contain_endpoints(n):
    for name in ("sorted_asc", "sorted_desc"):
        xs = generate(WorkloadSpec(name, n))
        assert 0.0 in xs and 1.0 in xs


def test_invalid_specs():
    with pytest.raises(InvalidSpec):
        generate(WorkloadSpec("nope", 5))
    with pytest.raises(InvalidSpec):
        generate(WorkloadSpec("uniform", 0))
    with pytest.raises(InvalidSpec):
        generate(WorkloadSpec("two_cluster", 4, params={"gap": 1.5}))


def test_spec_from_config_entry():
    spec = WorkloadSpec.from_dict({"name": "interval_flood", "flood_width": 0.05}, 10, 3)
    assert spec.param("flood_width") == 0.05 and spec.seed == 3
    assert WorkloadSpec.from_dict("uniform", 10, 3).name == "uniform"


# --- adversary ----------------------------------------------------------------


def test_incremental_cost_cases():
    assert incremental_cost(0.3, None, None) == 0.0
    assert incremental_cost(0.3, 0.5, None) == pytest.approx(0.2)
    assert incremental_cost(0.3, None, 0.1) == pytest.approx(0.2)
    assert incremental_cost(0.3, 0.1, 0.5) == 0.0
    assert incremental_cost(0.9, 0.1, 0.5) == pytest.approx(0.8)


def test_adversary_first_steps():
    a = ArrayState(6)
    assert midpoint_adversary_next(a, []) == 0.0
    adv = MidpointAdversary(3)
    assert adv.next_value(a) == 0.0
    a.write(0, 0.0)
    adv.observe(0, 0.0)
    assert adv.next_value(a) == 1.0  # 0 scores 0, 1 scores 1
    a.write(1, 1.0)
    adv.observe(1, 1.0)
    # candidates are now {0, 0.5, 1}; only the trailing run is empty
    assert midpoint_adversary_next(a, [0.0, 1.0]) == adv.next_value(a) == 0.0


def _scripted(strategy_name, n, eps, seed):
    top = derive_top(n, eps)
    s = new_strategy(strategy_name, top.k, top.delta, n, top.N, 0.0, NORMALIZED_BETA, seed=seed)
    adv = MidpointAdversary(n)
    emitted = []
    for _ in range(n):
        ref = midpoint_adversary_next(s.array, emitted)
        x = adv.next_value(s.array)
        assert x == ref
        cell = s.place(x)
        adv.observe(cell, x)
        emitted.append(x)
    return s


@pytest.mark.parametrize("strategy", ["sorter", "baseline", "naive_sequential", "random_cell"])
def test_adversary_matches_stateless_reference(strategy):
    _scripted(strategy, 300, 1.0, 4)


class _Scatter:
    """Places values at pseudo-random empty cells so runs get varied neighbours."""

    def __init__(self, N, seed):
        self.array = ArrayState(N)
        self.rnd = random.Random(seed)

    def place(self, x):
        empty = [i for i, v in enumerate(self.array.cells) if v is None]
        c = self.rnd.choice(empty)
        self.array.write(c, x)
        return c


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 30), st.integers(0, 10**6))
def test_adversary_matches_reference_on_scattered_arrays(n, extra, seed):
    s = _Scatter(n + extra, seed)
    adv = MidpointAdversary(n)
    emitted = []
    for _ in range(n):
        x = adv.next_value(s.array)
        assert x == midpoint_adversary_next(s.array, emitted)
        adv.observe(s.place(x), x)
        emitted.append(x)


def test_adversary_beats_uniform_against_naive():
    n = 2000
    naive_adv = NaiveSequential(n, 2 * n, 0.0, NORMALIZED_BETA)
    adv_cost = cost(run(naive_adv, generate(WorkloadSpec("midpoint_adversary", n))).array)
    naive_uni = NaiveSequential(n, 2 * n, 0.0, NORMALIZED_BETA)
    uni_cost = cost(run(naive_uni, generate(WorkloadSpec("uniform", n, seed=42))).array)
    assert adv_cost >= uni_cost
    assert adv_cost == n - 1  # alternates 0 and 1


def test_adversary_requires_fresh_array():
    a = ArrayState(3)
    a.write(0, 0.2)
    with pytest.raises(InvalidSpec):
        MidpointAdversary(2).next_value(a)
