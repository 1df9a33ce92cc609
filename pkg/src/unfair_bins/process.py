"""Sequential ball placement into bins with reproducible randomness.

The core process places ``m`` balls into ``n`` bins one at a time. Each
ball draws ``d`` option bins uniformly at random with replacement and is
placed according to the policy:

* ``UNFAIR``        - the most-loaded option wins (rich get richer),
* ``LEAST_LOADED``  - the least-loaded option wins (classic balancing),
* ``SINGLE_CHOICE`` - the first option wins regardless of load.

Ties among the *distinct* option bins at the extreme load are broken
uniformly; duplicate appearances of a label in the option set carry no
extra weight.

Determinism contract for :func:`run`: randomness is materialized from a
Philox stream in blocks of at most 65536 balls, each block consuming one
``integers`` draw of shape ``(block, d)`` followed by one ``random`` draw
of length ``block`` (one tie uniform per ball, consumed whether or not a
tie occurs). Identical configs therefore yield bit-identical results.

Bin labels are 1-based in every public signature; ``loads[k]`` holds the
load of bin label ``k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .seeding import MAX_SEED, make_generator

MAX_BALLS = 2**63 - 1
PER_BALL_TRACE_BUDGET = 10**7  # max n*m for snapshot_every=1 runs
_BLOCK = 1 << 16


class Policy(Enum):
    UNFAIR = "unfair"
    LEAST_LOADED = "least_loaded"
    SINGLE_CHOICE = "single_choice"


_POLICY_CODE = {
    Policy.UNFAIR: _kernels.UNFAIR,
    Policy.LEAST_LOADED: _kernels.LEAST_LOADED,
    Policy.SINGLE_CHOICE: _kernels.SINGLE_CHOICE,
}


class ConfigError(ValueError):
    """Invalid experiment parameters; ``fields`` names the offenders."""

    def __init__(self, problems: dict[str, str]):
        self.fields = sorted(problems)
        detail = "; ".join(f"{k}: {v}" for k, v in sorted(problems.items()))
        super().__init__(f"invalid configuration: {detail}")


@dataclass(frozen=True)
class ProcessConfig:
    """Full parameterization of one simulation run."""

    n: int
    m: int
    d: int
    policy: Policy = Policy.UNFAIR
    seed: int = 0
    snapshot_every: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "seed", int(self.seed))
        if self.snapshot_every is not None:
            object.__setattr__(self, "snapshot_every", int(self.snapshot_every))
        problems: dict[str, str] = {}
        if self.n < 1:
            problems["n"] = f"bin count must be >= 1, got {self.n}"
        if self.d < 1:
            problems["d"] = f"options per ball must be >= 1, got {self.d}"
        if not 0 <= self.m <= MAX_BALLS:
            problems["m"] = f"ball count must be in [0, 2**63), got {self.m}"
        if not isinstance(self.policy, Policy):
            problems["policy"] = f"unknown policy {self.policy!r}"
        if not 0 <= self.seed <= MAX_SEED:
            problems["seed"] = f"seed must be in [0, 2**64), got {self.seed}"
        if self.snapshot_every is not None and self.snapshot_every < 1:
            problems["snapshot_every"] = (
                f"snapshot stride must be >= 1, got {self.snapshot_every}"
            )
        if (
            self.snapshot_every == 1
            and "n" not in problems
            and "m" not in problems
            and self.n * self.m > PER_BALL_TRACE_BUDGET
        ):
            problems["snapshot_every"] = (
                f"per-ball traces require n*m <= {PER_BALL_TRACE_BUDGET}, "
                f"got {self.n * self.m}"
            )
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True, eq=False)
class Trace:
    """Load vectors recorded at increasing ball counts.

    ``loads[k]`` is the full load vector after ``times[k]`` balls.
    """

    times: np.ndarray
    loads: np.ndarray

    @property
    def n(self) -> int:
        return self.loads.shape[1]

    def __len__(self) -> int:
        return len(self.times)

    def is_per_ball(self) -> bool:
        return len(self.times) == int(self.times[-1]) + 1 and (
            np.all(np.diff(self.times) == 1) if len(self.times) > 1 else True
        )


def draw_option_set(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Draw d bin labels uniformly from 1..n with replacement."""
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return rng.integers(1, n + 1, size=d, dtype=np.int64)


def place_ball(
    loads: np.ndarray,
    options,
    policy: Policy,
    rng: np.random.Generator,
) -> int:
    """Place one ball; increments the chosen bin's load and returns its label.

    Always consumes exactly one uniform from ``rng`` (the tie-break draw),
    whether or not a tie occurs.
    """
    if not (
        isinstance(loads, np.ndarray) and loads.dtype == np.int64 and loads.ndim == 1
    ):
        raise TypeError("loads must be a 1-D int64 array (it is mutated in place)")
    n = loads.shape[0]
    opts = np.asarray(options, dtype=np.int64)
    if opts.ndim != 1 or opts.size == 0:
        raise ValueError("options must be a non-empty 1-D sequence of bin labels")
    if ((opts < 1) | (opts > n)).any():
        raise ValueError(f"option labels must lie in 1..{n}, got {list(opts)}")
    ties = np.array([rng.random()])
    chosen = _kernels.place_block(
        loads, np.ascontiguousarray(opts - 1).reshape(1, -1), ties, _POLICY_CODE[policy]
    )
    return int(chosen) + 1


def _snapshot_times(m: int, every: int | None) -> list[int]:
    if m == 0:
        return [0]
    if every is None:
        return [0, m]
    times = list(range(0, m, every))
    times.append(m)
    return times


def run(
    config: ProcessConfig, initial_loads: np.ndarray | None = None
) -> tuple[np.ndarray, Trace]:
    """Run the full process; returns the final load vector and its trace.

    ``initial_loads`` seeds a non-empty starting state (default: all
    zeros); snapshots then record total loads, so each snapshot sums to
    ``times[k] + sum(initial_loads)``. A pure function of its arguments.
    """
    n, m = config.n, config.m
    policy = _POLICY_CODE[config.policy]
    if initial_loads is None:
        loads = np.zeros(n, dtype=np.int64)
    else:
        loads = np.array(initial_loads, dtype=np.int64)
        if loads.shape != (n,):
            raise ValueError(f"initial_loads must have shape ({n},)")
        if (loads < 0).any():
            raise ValueError("initial_loads must be non-negative")
    times = _snapshot_times(m, config.snapshot_every)
    snaps = np.empty((len(times), n), dtype=np.int64)
    snaps[0] = loads
    rng = make_generator(config.seed)
    per_ball = config.snapshot_every == 1 and m > 0
    t0 = 0
    si = 1
    while t0 < m:
        block = int(min(_BLOCK, m - t0))
        options = rng.integers(0, n, size=(block, config.d), dtype=np.int64)
        ties = rng.random(block)
        if per_ball:
            _kernels.place_block_trace(loads, options, ties, policy, snaps[si : si + block])
            si += block
        else:
            pos = 0
            while pos < block:
                seg_end = min(block, times[si] - t0)
                _kernels.place_block(loads, options[pos:seg_end], ties[pos:seg_end], policy)
                pos = seg_end
                if t0 + pos == times[si]:
                    snaps[si] = loads
                    si += 1
        t0 += block
    return loads, Trace(np.asarray(times, dtype=np.int64), snaps)
