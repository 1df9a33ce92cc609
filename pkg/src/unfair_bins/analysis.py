"""Observables derived from runs: sorted profiles, rank stability, gap
trajectories, overtake-frequency estimates, and multi-trial aggregation.

Trial execution is embarrassingly parallel; the runner dispatches trials
to a thread pool (the placement kernels drop the GIL) and collects results
by trial index, so output never depends on completion order. Parallelism
defaults to the ``UNFAIR_BINS_JOBS`` environment variable, falling back
to the hardware thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .process import _POLICY_CODE, Policy, ProcessConfig, Trace, run
from .seeding import derive_seed, make_generator
from .theory import PredictionCurve

_BLOCK = 1 << 16
_BATCH_ELEMENT_BUDGET = 1 << 22  # max option-array elements held at once

QUANTILE_LEVELS = (5, 25, 50, 75, 95)


def default_jobs() -> int:
    env = os.environ.get("UNFAIR_BINS_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _parallel_map(fn, items, jobs: int | None):
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True, eq=False)
class SortedProfile:
    """Loads reordered least- to most-loaded, with the rank permutation.

    ``rank_to_label[k]`` is the 1-based original label of the bin holding
    rank ``k + 1``; equal-load blocks are internally ordered uniformly at
    random under the tie seed.
    """

    loads_sorted: np.ndarray
    rank_to_label: np.ndarray


def sort_profile(loads: np.ndarray, tie_seed: int) -> SortedProfile:
    """Sort a load vector, breaking equal-load label order randomly.

    Deterministic given (loads, tie_seed): a seeded random priority
    permutation serves as the secondary sort key, so every ordering of an
    equal-load block is equally likely across tie seeds.
    """
    loads = np.asarray(loads, dtype=np.int64)
    if loads.ndim != 1 or loads.size == 0:
        raise ValueError("loads must be a non-empty 1-D array")
    if (loads < 0).any():
        raise ValueError("loads must be non-negative")
    rng = make_generator(tie_seed)
    priority = rng.permutation(loads.size)
    order = np.lexsort((priority, loads))
    return SortedProfile(
        loads_sorted=loads[order], rank_to_label=(order + 1).astype(np.int64)
    )


def rank_stabilization_time(trace: Trace) -> int | None:
    """Ball index after which no pair of bins strictly reverses order.

    A reversal for pair (a, b) is a strict sign change of ``load_a - load_b``
    between consecutive *nonzero* signs; intervening ties neither count as
    reversals nor reset the previous sign. Returns the time of the last
    reversal (0 if none), or None when a reversal lands on the final ball,
    in which case the trace gives no evidence of stabilization.
    """
    if not trace.is_per_ball():
        raise ValueError("rank stabilization requires a per-ball trace (snapshot_every=1)")
    loads = trace.loads
    n = trace.n
    horizon = int(trace.times[-1])
    last = 0
    for a in range(n - 1):
        col_a = loads[:, a]
        for b in range(a + 1, n):
            signs = np.sign(col_a - loads[:, b])
            nonzero = np.flatnonzero(signs)
            if nonzero.size < 2:
                continue
            vals = signs[nonzero]
            flips = nonzero[1:][vals[1:] != vals[:-1]]
            if flips.size:
                last = max(last, int(flips[-1]))
    if last == horizon and horizon > 0:
        return None
    return last


@dataclass(frozen=True, eq=False)
class PairGapSeries:
    """Absolute load difference of one bin pair at each snapshot."""

    label_a: int
    label_b: int
    times: np.ndarray
    gaps: np.ndarray

    def first_hit_time(self, gap_target: int) -> int | None:
        """First snapshot time with gap >= gap_target, or None if never."""
        hits = np.flatnonzero(self.gaps >= gap_target)
        return int(self.times[hits[0]]) if hits.size else None


def pair_gap_series(trace: Trace, label_a: int, label_b: int) -> PairGapSeries:
    n = trace.n
    if label_a == label_b:
        raise ValueError("pair labels must be distinct")
    for lab in (label_a, label_b):
        if not 1 <= lab <= n:
            raise ValueError(f"label must lie in 1..{n}, got {lab}")
    gaps = np.abs(trace.loads[:, label_a - 1] - trace.loads[:, label_b - 1])
    return PairGapSeries(
        label_a=label_a, label_b=label_b, times=trace.times, gaps=gaps
    )


def swap_probability_estimate(
    n: int,
    d: int,
    initial_gap: int,
    m_horizon: int,
    trials: int,
    seed: int,
    jobs: int | None = None,
) -> tuple[float, float]:
    """Monte Carlo frequency of a leading bin ever being overtaken.

    Starts each trial from the adversarially simple state: bin 1 (the
    trailer) at load 0, bin 2 (the leader) at ``initial_gap``, all other
    bins at 0. Counts the trials in which the leader's load becomes
    strictly smaller than the trailer's within ``m_horizon`` balls under
    the max-of-d policy. Returns (frequency, binomial standard error).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if initial_gap < 1:
        raise ValueError(f"initial_gap must be >= 1, got {initial_gap}")
    if n < 2:
        raise ValueError(f"need n >= 2 for a designated pair, got {n}")
    if d < 1 or m_horizon < 0:
        raise ValueError(f"need d >= 1 and m_horizon >= 0, got d={d}, m_horizon={m_horizon}")
    trailer, leader = 0, 1  # 0-based indices of labels 1 and 2

    def one_trial(trial: int) -> bool:
        rng = make_generator(derive_seed(seed, trial, "swap"))
        loads = np.zeros(n, dtype=np.int64)
        loads[leader] = initial_gap
        remaining = m_horizon
        while remaining > 0:
            block = int(min(_BLOCK, remaining))
            options = rng.integers(0, n, size=(block, d), dtype=np.int64)
            ties = rng.random(block)
            if _kernels.swap_block(loads, options, ties, leader, trailer) >= 0:
                return True
            remaining -= block
        return False

    swapped = sum(_parallel_map(one_trial, range(trials), jobs))
    freq = swapped / trials
    stderr = math.sqrt(freq * (1.0 - freq) / trials)
    return freq, stderr


@dataclass(frozen=True, eq=False)
class TrialRun:
    """One trial's outputs: final loads, trace, and tie-broken sorted profile."""

    trial: int
    loads: np.ndarray
    trace: Trace
    profile: SortedProfile


def run_trials(
    config: ProcessConfig, trials: int, jobs: int | None = None
) -> list[TrialRun]:
    """Run independent trials; trial t's placement and tie seeds are pure
    functions of (config.seed, t)."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def one_trial(trial: int) -> TrialRun:
        cfg = replace(config, seed=derive_seed(config.seed, trial, "placement"))
        loads, trace = run(cfg)
        profile = sort_profile(loads, derive_seed(config.seed, trial, "tie"))
        return TrialRun(trial=trial, loads=loads, trace=trace, profile=profile)

    return _parallel_map(one_trial, range(trials), jobs)


def sample_sorted_profiles(
    n: int,
    m: int,
    d: int,
    trials: int,
    seed: int,
    policy: Policy = Policy.UNFAIR,
) -> np.ndarray:
    """Final sorted profiles of many runs from one batched stream.

    Fast path for distribution checks where only the sorted multiset
    matters; returns an int64 array of shape (trials, n) with each row
    non-decreasing. Deterministic given all arguments.
    """
    ProcessConfig(n=n, m=m, d=d, policy=policy, seed=seed)  # validate
    rng = make_generator(seed)
    out = np.zeros((trials, n), dtype=np.int64)
    chunk = max(1, min(trials, _BATCH_ELEMENT_BUDGET // max(1, m * d)))
    code = _POLICY_CODE[policy]
    start = 0
    while start < trials:
        t = int(min(chunk, trials - start))
        options = rng.integers(0, n, size=(t, m, d), dtype=np.int64)
        ties = rng.random((t, m))
        _kernels.batch_profiles(out[start : start + t], options, ties, code)
        start += t
    out.sort(axis=1)
    return out


def empirical_profile_frequencies(profiles: np.ndarray) -> dict[tuple[int, ...], float]:
    """Relative frequency of each distinct sorted profile row."""
    rows, counts = np.unique(profiles, axis=0, return_counts=True)
    total = profiles.shape[0]
    return {tuple(int(x) for x in row): int(c) / total for row, c in zip(rows, counts)}


@dataclass(frozen=True, eq=False)
class TrialAggregate:
    """Per-rank statistics of sorted loads across trials."""

    config: ProcessConfig
    trials: int
    mean: np.ndarray
    std: np.ndarray
    load_min: np.ndarray
    load_max: np.ndarray
    quantiles: dict[int, np.ndarray]
    label_mode: np.ndarray


def aggregate_trials(
    profiles: list[SortedProfile], config: ProcessConfig
) -> TrialAggregate:
    """Rank-wise mean/std/min/max/quantiles over trials of one config.

    Quantiles use the nearest-rank method (exact order statistics on
    integer data) at levels 5/25/50/75/95. ``label_mode`` is the most
    frequent original label at each rank (smallest label on ties).
    """
    if len(profiles) == 0:
        raise ValueError("need at least one trial")
    data = np.stack([p.loads_sorted for p in profiles])
    labels = np.stack([p.rank_to_label for p in profiles])
    if data.shape[1] != config.n:
        raise ValueError(
            f"mixed configs: profile length {data.shape[1]} does not match n={config.n}"
        )
    sums = data.sum(axis=1)
    if not np.all(sums == config.m):
        raise ValueError(
            f"mixed configs: trial totals {sorted(set(sums.tolist()))} != m={config.m}"
        )
    count = data.shape[0]
    mean = data.mean(axis=0)
    std = data.std(axis=0, ddof=1) if count > 1 else np.zeros(config.n)
    ordered = np.sort(data, axis=0)
    quantiles = {
        q: ordered[max(math.ceil(q * count / 100) - 1, 0)].copy()
        for q in QUANTILE_LEVELS
    }
    label_mode = np.array(
        [
            np.bincount(labels[:, r], minlength=config.n + 1).argmax()
            for r in range(config.n)
        ],
        dtype=np.int64,
    )
    return TrialAggregate(
        config=config,
        trials=count,
        mean=mean,
        std=std,
        load_min=data.min(axis=0),
        load_max=data.max(axis=0),
        quantiles=quantiles,
        label_mode=label_mode,
    )


@dataclass(frozen=True, eq=False)
class DeviationReport:
    """Rank-wise error of an aggregate against a prediction curve.

    Relative error uses the floor ``max(prediction, 1)`` so near-zero
    predicted loads do not blow up the ratio.
    """

    abs_error: np.ndarray
    rel_error: np.ndarray
    max_abs_error: float
    max_rel_error: float

    def fraction_within(self, rel_tol: float) -> float:
        return float(np.mean(self.rel_error <= rel_tol))


def deviation_report(
    aggregate: TrialAggregate, curve: PredictionCurve
) -> DeviationReport:
    if curve.values.shape[0] != aggregate.mean.shape[0]:
        raise ValueError(
            f"rank count mismatch: curve has {curve.values.shape[0]}, "
            f"aggregate has {aggregate.mean.shape[0]}"
        )
    abs_error = np.abs(aggregate.mean - curve.values)
    rel_error = abs_error / np.maximum(curve.values, 1.0)
    return DeviationReport(
        abs_error=abs_error,
        rel_error=rel_error,
        max_abs_error=float(abs_error.max()),
        max_rel_error=float(rel_error.max()),
    )
