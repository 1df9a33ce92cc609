"""Closed-form predictions and probability bounds for the max-of-d process.

Once bin ranks are stable, the rank-``i`` bin (i-th smallest) receives
each ball with probability ``(i/n)**d - ((i-1)/n)**d``, which makes its
long-run load approximately that probability times ``m``; at relative
rank ``c = i/n`` this is the power law ``d * c**(d-1) * m / n`` up to an
``O(m/n**2)`` correction. The module also exposes the gambler's-ruin
overtake bound, the two-sided Hoeffding binomial tail, and the exact
big-integer phase-length constants used to reason about when ranks lock.

Every function has a fast float mode; the allocation probabilities also
have an exact rational mode (``exact=True``) for identity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


def rank_hit_probability(i: int, n: int, d: int, exact: bool = False):
    """Probability that the rank-i bin (i-th smallest of n) wins the next ball.

    Equals the chance that the maximum of d uniform draws from 1..n is i:
    ``(i/n)**d - ((i-1)/n)**d``. Sums to 1 over i = 1..n.
    """
    if not 1 <= i <= n:
        raise ValueError(f"rank must lie in 1..{n}, got {i}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if exact:
        return Fraction(i, n) ** d - Fraction(i - 1, n) ** d
    return (i / n) ** d - ((i - 1) / n) ** d


def expected_load(i: int, n: int, d: int, m: int, exact: bool = False):
    """Predicted load of the rank-i bin after m balls: m * rank_hit_probability."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return m * rank_hit_probability(i, n, d, exact)


def power_law_load(c, d: int, m: int, n: int, exact: bool = False):
    """Power-law approximation of the load at relative rank c in (0, 1].

    ``d * c**(d-1) * (m/n)``; differs from :func:`expected_load` at
    ``i = c*n`` by at most O(m/n**2).
    """
    if not 0 < c <= 1:
        raise ValueError(f"relative rank must lie in (0, 1], got {c}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if exact:
        cf = c if isinstance(c, Fraction) else Fraction(c)
        return d * cf ** (d - 1) * Fraction(m, n)
    return d * c ** (d - 1) * (m / n)


@dataclass(frozen=True, eq=False)
class PredictionCurve:
    """Per-rank predicted loads; ``values[k]`` belongs to rank ``k + 1``."""

    n: int
    d: int
    m: int
    values: np.ndarray


def prediction_curve(n: int, d: int, m: int) -> PredictionCurve:
    """Predicted load for every rank 1..n; entries sum to m (telescoping)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d == 1:
        values = np.full(n, m / n)
    else:
        values = np.array([expected_load(i, n, d, m) for i in range(1, n + 1)])
    return PredictionCurve(n=n, d=d, m=m, values=values)


def gambler_ruin_bound(gap: int, n: int, d: int) -> float:
    """Upper bound on a leading bin with the given load gap ever being overtaken.

    ``exp(-gap * (d-1) / n)``; a bin ahead by ``delta * n / (d-1)`` balls is
    overtaken with probability at most ``exp(-delta)``, at any future time.
    Vacuous (returns 1) at d = 1, where there is no bias.
    """
    if gap < 0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if d == 1:
        return 1.0
    return math.exp(-gap * (d - 1) / n)


def hoeffding_tail(trials: int, deviation: float, clamp: bool = False) -> float:
    """Two-sided binomial tail bound ``Pr(|B(trials, p) - trials*p| > a)``.

    Returns ``2 * exp(-2 * a**2 / trials)``, which exceeds 1 for small
    deviations; ``clamp=True`` caps the result at 1.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if deviation < 0:
        raise ValueError(f"deviation must be >= 0, got {deviation}")
    value = 2.0 * math.exp(-2.0 * deviation * deviation / trials)
    return min(1.0, value) if clamp else value


@dataclass(frozen=True)
class PhaseConstants:
    """Exact big-integer phase lengths for the rank-locking argument.

    ``init_balls`` and ``pair_phase_length`` are both exposed although
    ``init_balls != comb(n,2) * pair_phase_length``; each field equals its
    own defining formula and no consistency between them is asserted.
    """

    n: int
    d: int
    init_balls: int  # n**(3d+12): total initialization length
    pair_phase_length: int  # n**(3d+10): balls per pair-focused phase
    pair_ball_quota: int  # n**(2d+10): joint balls a pair must receive
    gap_target: int  # n**2: load gap every pair must reach
    convergence_threshold: int  # n**(4d+13): ball count beyond which ranks lock


def phase_constants(n: int, d: int) -> PhaseConstants:
    """Evaluate the phase-length formulas exactly (Python big integers)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return PhaseConstants(
        n=n,
        d=d,
        init_balls=n ** (3 * d + 12),
        pair_phase_length=n ** (3 * d + 10),
        pair_ball_quota=n ** (2 * d + 10),
        gap_target=n**2,
        convergence_threshold=n ** (4 * d + 13),
    )
