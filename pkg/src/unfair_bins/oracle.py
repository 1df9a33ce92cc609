"""Exact law of the sorted load profile for small instances.

Because bins are exchangeable, the process induces a Markov chain on
*sorted* load profiles (multisets of loads), collapsing the n! labelings
into partition space. This module evolves that chain with exact rational
arithmetic, giving ground truth to compare the simulator against.

Transition law for the max-of-d policy: a maximal block of k equal loads
with s bins strictly below it receives the next ball with probability
``((s+k)/n)**d - (s/n)**d`` (the chance that the option-set maximum falls
in the block), and symmetry plus uniform tie-breaking gives each block
member an equal 1/k share of that.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

DEFAULT_MAX_STATES = 10**6

Profile = tuple[int, ...]


class BudgetExceededError(RuntimeError):
    """Raised when the state space outgrows the configured budget."""


@dataclass(frozen=True, eq=True)
class ExactDistribution:
    """Probability map over sorted load profiles after ``balls`` placements."""

    n: int
    d: int
    balls: int
    support: dict[Profile, Fraction]

    def total_mass(self) -> Fraction:
        return sum(self.support.values(), Fraction(0))


def tie_groups(profile: Profile) -> list[tuple[int, int]]:
    """Maximal runs of equal loads in a sorted profile as (start, size) pairs."""
    groups = []
    start = 0
    for idx in range(1, len(profile) + 1):
        if idx == len(profile) or profile[idx] != profile[start]:
            groups.append((start, idx - start))
            start = idx
    return groups


def _validate_profile(profile: Profile) -> None:
    if len(profile) == 0:
        raise ValueError("profile must be non-empty")
    if any(profile[i] > profile[i + 1] for i in range(len(profile) - 1)):
        raise ValueError(f"profile must be non-decreasing, got {profile}")
    if profile[0] < 0:
        raise ValueError(f"loads must be non-negative, got {profile}")


def transition_probability(profile: Profile, d: int, rank: int) -> Fraction:
    """Exact probability that the specific bin at ``rank`` gets the next ball.

    ``rank`` is 1-based and selects the tie group containing it; every
    member of that group has the same per-bin probability
    ``(((s+k)/n)**d - (s/n)**d) / k``.
    """
    _validate_profile(profile)
    n = len(profile)
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not 1 <= rank <= n:
        raise ValueError(f"rank must lie in 1..{n}, got {rank}")
    for start, size in tie_groups(profile):
        if start <= rank - 1 < start + size:
            hit = Fraction(start + size, n) ** d - Fraction(start, n) ** d
            return hit / size
    raise AssertionError("unreachable: rank not covered by any tie group")


def evolve(dist: ExactDistribution) -> ExactDistribution:
    """Push every profile through one ball placement; exact, mass-preserving."""
    n, d = dist.n, dist.d
    support: dict[Profile, Fraction] = {}
    for profile, p in dist.support.items():
        for start, size in tie_groups(profile):
            hit = Fraction(start + size, n) ** d - Fraction(start, n) ** d
            # incrementing the topmost member of a group keeps the tuple sorted
            succ = list(profile)
            succ[start + size - 1] += 1
            key = tuple(succ)
            mass = p * hit
            support[key] = support.get(key, Fraction(0)) + mass
    return ExactDistribution(n=n, d=d, balls=dist.balls + 1, support=support)


def exact_distribution(
    n: int, m: int, d: int, max_states: int = DEFAULT_MAX_STATES
) -> ExactDistribution:
    """Exact sorted-profile law after m balls into n bins with d options."""
    if n < 1 or d < 1 or m < 0:
        raise ValueError(f"need n >= 1, d >= 1, m >= 0, got n={n}, d={d}, m={m}")
    dist = ExactDistribution(
        n=n, d=d, balls=0, support={(0,) * n: Fraction(1)}
    )
    for ball in range(m):
        dist = evolve(dist)
        if len(dist.support) > max_states:
            raise BudgetExceededError(
                f"{len(dist.support)} profiles after ball {ball + 1} exceeds "
                f"the state budget max_states={max_states}"
            )
    return dist


def exact_sorted_means(
    n: int, m: int, d: int, max_states: int = DEFAULT_MAX_STATES
) -> list[Fraction]:
    """Exact expected load of each rank (1..n) after m balls."""
    dist = exact_distribution(n, m, d, max_states=max_states)
    means = [Fraction(0)] * n
    for profile, p in dist.support.items():
        for idx, load in enumerate(profile):
            means[idx] += p * load
    return means


def total_variation(p: dict[Profile, object], q: dict[Profile, object]) -> float:
    """Total variation distance between two profile distributions."""
    keys = set(p) | set(q)
    return float(sum(abs(float(p.get(k, 0)) - float(q.get(k, 0))) for k in keys)) / 2.0
