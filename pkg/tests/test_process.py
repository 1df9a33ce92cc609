import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import unfair_bins as ub
from unfair_bins import _kernels
from unfair_bins.process import _snapshot_times


def test_config_error_lists_offending_fields():
    with pytest.raises(ub.ConfigError) as excinfo:
        ub.ProcessConfig(n=0, m=-1, d=0, seed=-5)
    assert {"n", "m", "d", "seed"} <= set(excinfo.value.fields)


def test_config_rejects_oversized_per_ball_trace():
    with pytest.raises(ub.ConfigError) as excinfo:
        ub.ProcessConfig(n=100, m=10**6, d=2, snapshot_every=1)
    assert excinfo.value.fields == ["snapshot_every"]


def test_config_accepts_boundary_values():
    ub.ProcessConfig(n=1, m=0, d=1, seed=2**64 - 1)
    ub.ProcessConfig(n=1, m=2**63 - 1, d=1)


def test_snapshot_times():
    assert _snapshot_times(0, None) == [0]
    assert _snapshot_times(10, None) == [0, 10]
    assert _snapshot_times(10, 4) == [0, 4, 8, 10]
    assert _snapshot_times(10, 5) == [0, 5, 10]
    assert _snapshot_times(3, 1) == [0, 1, 2, 3]


class TestDrawOptionSet:
    def test_single_bin(self):
        rng = ub.make_generator(0)
        assert tuple(ub.draw_option_set(rng, 1, 3)) == (1, 1, 1)

    def test_reproducible_and_advancing(self):
        first = ub.draw_option_set(ub.make_generator(7), 5, 2)
        again = ub.draw_option_set(ub.make_generator(7), 5, 2)
        assert np.array_equal(first, again)
        rng = ub.make_generator(7)
        a, b = ub.draw_option_set(rng, 50, 4), ub.draw_option_set(rng, 50, 4)
        assert not np.array_equal(a, b)

    def test_pairs_uniform(self):
        rng = ub.make_generator(1234)
        trials = 40_000
        counts = np.zeros((2, 2), dtype=np.int64)
        for _ in range(trials):
            i, j = ub.draw_option_set(rng, 2, 2)
            counts[i - 1, j - 1] += 1
        sigma = math.sqrt(0.25 * 0.75 / trials)
        assert np.all(np.abs(counts / trials - 0.25) <= 4 * sigma)

    def test_rejects_bad_parameters(self):
        rng = ub.make_generator(0)
        with pytest.raises(ValueError):
            ub.draw_option_set(rng, 0, 2)
        with pytest.raises(ValueError):
            ub.draw_option_set(rng, 2, 0)


class TestPlaceBall:
    def test_unique_maximum_wins(self):
        loads = np.array([0, 5, 3], dtype=np.int64)
        label = ub.place_ball(loads, (2, 3, 3), ub.Policy.UNFAIR, ub.make_generator(0))
        assert label == 2
        assert loads.tolist() == [0, 6, 3]

    def test_single_distinct_option(self):
        loads = np.array([3, 1], dtype=np.int64)
        label = ub.place_ball(loads, (2, 2), ub.Policy.UNFAIR, ub.make_generator(0))
        assert label == 2
        assert loads.tolist() == [3, 2]

    def test_least_loaded_symmetric(self):
        loads = np.array([4, 1, 9], dtype=np.int64)
        label = ub.place_ball(loads, (1, 3), ub.Policy.LEAST_LOADED, ub.make_generator(0))
        assert label == 1

    def test_single_choice_ignores_loads(self):
        loads = np.array([0, 100], dtype=np.int64)
        label = ub.place_ball(loads, (1, 2), ub.Policy.SINGLE_CHOICE, ub.make_generator(0))
        assert label == 1

    def test_tie_frequency_half(self):
        rng = ub.make_generator(99)
        trials = 100_000
        hits = 0
        for _ in range(trials):
            loads = np.array([2, 2], dtype=np.int64)
            hits += ub.place_ball(loads, (1, 2), ub.Policy.UNFAIR, rng) == 1
        sigma = math.sqrt(0.25 / trials)
        assert abs(hits / trials - 0.5) <= 4 * sigma

    def test_three_way_tie_is_uniform(self):
        rng = ub.make_generator(606)
        trials = 60_000
        counts = np.zeros(4, dtype=np.int64)
        for _ in range(trials):
            loads = np.full(3, 7, dtype=np.int64)
            counts[ub.place_ball(loads, (1, 2, 3), ub.Policy.UNFAIR, rng)] += 1
        p = 1 / 3
        sigma = math.sqrt(p * (1 - p) / trials)
        assert np.all(np.abs(counts[1:] / trials - p) <= 4 * sigma)

    def test_duplicate_options_carry_no_weight(self):
        # multiset (1, 1, 2) with all loads equal: each *distinct* bin gets 1/2,
        # not the 2/3 a per-element rule would give
        rng = ub.make_generator(4321)
        trials = 40_000
        hits = 0
        for _ in range(trials):
            loads = np.zeros(2, dtype=np.int64)
            hits += ub.place_ball(loads, (1, 1, 2), ub.Policy.UNFAIR, rng) == 1
        sigma = math.sqrt(0.25 / trials)
        assert abs(hits / trials - 0.5) <= 4 * sigma

    def test_out_of_range_label_rejected(self):
        loads = np.zeros(3, dtype=np.int64)
        with pytest.raises(ValueError):
            ub.place_ball(loads, (0, 1), ub.Policy.UNFAIR, ub.make_generator(0))
        with pytest.raises(ValueError):
            ub.place_ball(loads, (1, 4), ub.Policy.UNFAIR, ub.make_generator(0))

    def test_requires_int64_loads(self):
        with pytest.raises(TypeError):
            ub.place_ball([0, 0], (1, 2), ub.Policy.UNFAIR, ub.make_generator(0))


class TestRun:
    def test_no_balls(self):
        loads, trace = ub.run(ub.ProcessConfig(n=2, m=0, d=2, seed=3))
        assert loads.tolist() == [0, 0]
        assert trace.times.tolist() == [0]
        assert trace.loads.tolist() == [[0, 0]]

    def test_deterministic(self):
        config = ub.ProcessConfig(n=20, m=5000, d=3, seed=17, snapshot_every=911)
        loads_a, trace_a = ub.run(config)
        loads_b, trace_b = ub.run(config)
        assert np.array_equal(loads_a, loads_b)
        assert np.array_equal(trace_a.loads, trace_b.loads)
        assert np.array_equal(trace_a.times, trace_b.times)

    def test_policy_duality_at_d1(self):
        results = [
            ub.run(ub.ProcessConfig(n=6, m=400, d=1, policy=policy, seed=88))[0]
            for policy in ub.Policy
        ]
        assert np.array_equal(results[0], results[1])
        assert np.array_equal(results[0], results[2])

    def test_two_balls_two_bins_profile_law(self):
        # second ball joins the first iff its option pair hits the loaded bin:
        # 1 - (1/2)^2 = 3/4 (hand enumeration; oracle agrees)
        trials = 100_000
        profiles = ub.sample_sorted_profiles(2, 2, 2, trials=trials, seed=5150)
        freq = ub.empirical_profile_frequencies(profiles)[(0, 2)]
        assert abs(freq - 0.75) <= 3 * math.sqrt(0.75 * 0.25 / trials)

    def test_unfair_spreads_and_least_loaded_balances(self):
        unfair, _ = ub.run(ub.ProcessConfig(n=4, m=4000, d=2, seed=31))
        least, _ = ub.run(
            ub.ProcessConfig(n=4, m=4000, d=2, policy=ub.Policy.LEAST_LOADED, seed=31)
        )
        assert unfair.max() - unfair.min() > 800
        assert least.max() - least.min() <= 12

    def test_initial_loads_extend_conservation(self):
        start = np.array([5, 0, 2], dtype=np.int64)
        loads, trace = ub.run(
            ub.ProcessConfig(n=3, m=100, d=2, seed=9, snapshot_every=30), start
        )
        assert loads.sum() == 107
        assert np.array_equal(trace.loads.sum(axis=1), trace.times + 7)
        assert trace.loads[0].tolist() == [5, 0, 2]

    def test_initial_loads_validated(self):
        config = ub.ProcessConfig(n=3, m=1, d=2)
        with pytest.raises(ValueError):
            ub.run(config, np.array([1, 2], dtype=np.int64))
        with pytest.raises(ValueError):
            ub.run(config, np.array([1, -1, 0], dtype=np.int64))

    @given(
        n=st.integers(1, 8),
        m=st.integers(0, 60),
        d=st.integers(1, 4),
        seed=st.integers(0, 2**32),
        policy=st.sampled_from(list(ub.Policy)),
        stride=st.one_of(st.none(), st.integers(1, 20)),
    )
    @settings(max_examples=40)
    def test_trace_invariants(self, n, m, d, seed, policy, stride):
        config = ub.ProcessConfig(
            n=n, m=m, d=d, policy=policy, seed=seed, snapshot_every=stride
        )
        loads, trace = ub.run(config)
        assert int(loads.sum()) == m
        assert (loads >= 0).all()
        assert trace.times[0] == 0
        assert trace.times[-1] == m
        assert np.all(np.diff(trace.times) > 0) or len(trace.times) == 1
        assert np.array_equal(trace.loads.sum(axis=1), trace.times)
        assert trace.loads[0].tolist() == [0] * n
        assert np.array_equal(trace.loads[-1], loads)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
class TestKernelEquivalence:
    """The compiled kernels must agree bit-for-bit with their Python sources."""

    def _stream(self, n, d, balls, seed):
        rng = ub.make_generator(seed)
        options = rng.integers(0, n, size=(balls, d), dtype=np.int64)
        ties = rng.random(balls)
        return options, ties

    @pytest.mark.parametrize("policy", [0, 1, 2])
    def test_place_block(self, policy):
        options, ties = self._stream(7, 3, 4000, 1)
        fast, slow = np.zeros(7, np.int64), np.zeros(7, np.int64)
        last_fast = _kernels.place_block(fast, options, ties, policy)
        last_slow = _kernels._place_block_py(slow, options, ties, policy)
        assert np.array_equal(fast, slow)
        assert int(last_fast) == int(last_slow)

    def test_place_block_trace(self):
        options, ties = self._stream(5, 2, 500, 2)
        fast, slow = np.zeros(5, np.int64), np.zeros(5, np.int64)
        out_fast = np.empty((500, 5), np.int64)
        out_slow = np.empty((500, 5), np.int64)
        _kernels.place_block_trace(fast, options, ties, 0, out_fast)
        _kernels._place_block_trace_py(slow, options, ties, 0, out_slow)
        assert np.array_equal(out_fast, out_slow)

    def test_swap_block(self):
        options, ties = self._stream(6, 2, 3000, 3)
        fast = np.zeros(6, np.int64)
        slow = np.zeros(6, np.int64)
        fast[1] = slow[1] = 2
        r_fast = _kernels.swap_block(fast, options, ties, 1, 0)
        r_slow = _kernels._swap_block_py(slow, options, ties, 1, 0)
        assert int(r_fast) == int(r_slow)
        assert np.array_equal(fast, slow)

    def test_batch_profiles(self):
        rng = ub.make_generator(4)
        options = rng.integers(0, 4, size=(50, 30, 2), dtype=np.int64)
        ties = rng.random((50, 30))
        fast = np.zeros((50, 4), np.int64)
        slow = np.zeros((50, 4), np.int64)
        _kernels.batch_profiles(fast, options, ties, 0)
        _kernels._batch_profiles_py(slow, options, ties, 0)
        assert np.array_equal(fast, slow)
