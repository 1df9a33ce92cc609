"""Named statistical and exact checks binding simulator, theory, and oracle.

Each check runs a fixed, seeded experiment at desk scale, compares the
measurement against its tolerance, and reports a :class:`CheckResult`.
The CLI ``verify`` subcommand prints them as a table and exits nonzero on
any failure; the test suite asserts them one by one. Tolerances are
pinned here; callers may override a check's primary tolerance by name.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np

from .analysis import (
    aggregate_trials,
    deviation_report,
    empirical_profile_frequencies,
    rank_stabilization_time,
    run_trials,
    sample_sorted_profiles,
    swap_probability_estimate,
)
from .experiment import ExperimentSpec, run_experiment
from .oracle import exact_distribution, total_variation
from .process import Policy, ProcessConfig
from .theory import (
    expected_load,
    power_law_load,
    prediction_curve,
    rank_hit_probability,
)

_SEED = 20250810  # base seed for every verification experiment


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: str
    tolerance: str
    claim: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.measured} (limit {self.tolerance}) - {self.claim}"


_FIGURE_BANDS = {2: (60, 0.10), 3: (70, 0.15), 4: (80, 0.20)}


def _figure_check(d: int, tolerance: float | None, jobs: int | None) -> CheckResult:
    first_rank, default_tol = _FIGURE_BANDS[d]
    tol = default_tol if tolerance is None else tolerance
    n, m, trials = 100, 10**6, 20
    config = ProcessConfig(n=n, m=m, d=d, policy=Policy.UNFAIR, seed=_SEED + d)
    runs = run_trials(config, trials, jobs=jobs)
    aggregate = aggregate_trials([r.profile for r in runs], config)
    report = deviation_report(aggregate, prediction_curve(n, d, m))
    worst = float(report.rel_error[first_rank - 1 :].max())
    passed = worst <= tol
    measured = f"max rel err {worst:.4f} over ranks {first_rank}..{n}"
    tol_text = f"<= {tol}"
    if d == 2:
        top_mean = float(aggregate.mean[-1])
        top_ok = 17900.0 <= top_mean <= 21900.0
        passed = passed and top_ok
        measured += f"; rank-100 mean {top_mean:.1f}"
        tol_text += ", rank-100 mean in [17900, 21900]"
    return CheckResult(
        name=f"figure_d{d}",
        passed=passed,
        measured=measured,
        tolerance=tol_text,
        claim=f"trial-mean sorted loads track the per-rank prediction at d={d}",
    )


def check_figure_d2(tolerance=None, jobs=None):
    return _figure_check(2, tolerance, jobs)


def check_figure_d3(tolerance=None, jobs=None):
    return _figure_check(3, tolerance, jobs)


def check_figure_d4(tolerance=None, jobs=None):
    return _figure_check(4, tolerance, jobs)


def check_oracle_exact(tolerance=None, jobs=None) -> CheckResult:
    """n=2, m=3, d=2: exact law {[0,3]: 9/16, [1,2]: 7/16} and simulator match."""
    trials = 100_000
    sigma_factor = 3.0 if tolerance is None else tolerance
    dist = exact_distribution(2, 3, 2)
    expected = {(0, 3): Fraction(9, 16), (1, 2): Fraction(7, 16)}
    exact_ok = dist.support == expected
    profiles = sample_sorted_profiles(2, 3, 2, trials=trials, seed=_SEED + 10)
    freqs = empirical_profile_frequencies(profiles)
    worst_ratio = 0.0
    for profile, p in expected.items():
        p = float(p)
        band = sigma_factor * math.sqrt(p * (1 - p) / trials)
        worst_ratio = max(worst_ratio, abs(freqs.get(profile, 0.0) - p) / band)
    stray = set(freqs) - set(expected)
    passed = exact_ok and worst_ratio <= 1.0 and not stray
    return CheckResult(
        name="oracle_exact",
        passed=passed,
        measured=(
            f"exact support {'ok' if exact_ok else 'WRONG'}; "
            f"worst |freq-p| at {worst_ratio:.2f}x the {sigma_factor:g}-sigma band"
        ),
        tolerance="support == {9/16, 7/16}; ratio <= 1",
        claim="simulator frequencies match the exact law at n=2, m=3, d=2",
    )


def check_oracle_tv(tolerance=None, jobs=None) -> CheckResult:
    """n=3, m=4, d=2: total variation between simulator and exact law."""
    tol = 0.01 if tolerance is None else tolerance
    trials = 100_000
    dist = exact_distribution(3, 4, 2)
    profiles = sample_sorted_profiles(3, 4, 2, trials=trials, seed=_SEED + 11)
    tv = total_variation(empirical_profile_frequencies(profiles), dist.support)
    return CheckResult(
        name="oracle_tv",
        passed=tv <= tol,
        measured=f"TV distance {tv:.5f} over {trials} trials",
        tolerance=f"<= {tol}",
        claim="sampled sorted-profile law matches the exact law at n=3, m=4, d=2",
    )


def check_uniform_d1(tolerance=None, jobs=None) -> CheckResult:
    """d=1 is uniform: every bin's trial-mean near m/n."""
    sigma_factor = 4.0 if tolerance is None else tolerance
    n, m, trials = 10, 10**4, 50
    config = ProcessConfig(n=n, m=m, d=1, policy=Policy.UNFAIR, seed=_SEED + 12)
    runs = run_trials(config, trials, jobs=jobs)
    finals = np.stack([r.loads for r in runs])
    mean = finals.mean(axis=0)
    stderr = finals.std(axis=0, ddof=1) / math.sqrt(trials)
    deviations = np.abs(mean - m / n)
    worst = float((deviations / (sigma_factor * stderr)).max())
    return CheckResult(
        name="uniform_d1",
        passed=worst <= 1.0,
        measured=f"worst |mean - {m // n}| at {worst:.2f}x the {sigma_factor:g}-sigma band",
        tolerance="ratio <= 1 for every bin",
        claim="single-option allocation is uniform across bins",
    )


def check_oracle_multinomial(tolerance=None, jobs=None) -> CheckResult:
    """d=1 exact law equals brute-force enumeration of ball-to-bin functions."""
    n, m = 3, 4
    dist = exact_distribution(n, m, 1)
    brute: dict[tuple[int, ...], Fraction] = {}
    weight = Fraction(1, n**m)
    for assignment in product(range(n), repeat=m):
        counts = [0] * n
        for bin_idx in assignment:
            counts[bin_idx] += 1
        key = tuple(sorted(counts))
        brute[key] = brute.get(key, Fraction(0)) + weight
    passed = dist.support == brute
    return CheckResult(
        name="oracle_multinomial",
        passed=passed,
        measured=f"{len(dist.support)} profiles, equality {'holds' if passed else 'FAILS'}",
        tolerance="exact rational equality",
        claim="d=1 law equals direct multinomial enumeration at n=3, m=4",
    )


def check_swap_bound(tolerance=None, jobs=None) -> CheckResult:
    """Overtake frequency stays within the gambler's-ruin bound."""
    n, d, gap, horizon, trials = 10, 2, 20, 10**5, 2000
    bound = math.exp(-gap * (d - 1) / n)  # e**-2
    threshold = (
        bound + 3.0 * math.sqrt(bound * (1 - bound) / trials)
        if tolerance is None
        else tolerance
    )
    freq, stderr = swap_probability_estimate(
        n, d, gap, horizon, trials, seed=_SEED + 13, jobs=jobs
    )
    return CheckResult(
        name="swap_bound",
        passed=freq <= threshold,
        measured=f"overtake frequency {freq:.4f} (stderr {stderr:.4f}, bound {bound:.4f})",
        tolerance=f"<= {threshold:.4f} (one-sided)",
        claim="a 20-ball lead at n=10, d=2 is overtaken at most e^-2 of the time",
    )


def check_exact_identities(tolerance=None, jobs=None) -> CheckResult:
    """Telescoping, conservation, and mass identities, exact or near machine-eps."""
    float_tol = 1e-12 if tolerance is None else tolerance
    failures: list[str] = []
    worst_float = 0.0

    for n in (1, 2, 3, 7, 10, 64, 100, 341, 1000):
        for d in range(1, 7):
            exact_sum = sum(rank_hit_probability(i, n, d, exact=True) for i in range(1, n + 1))
            if exact_sum != 1:
                failures.append(f"rational sum {exact_sum} at n={n}, d={d}")
            float_dev = abs(sum(rank_hit_probability(i, n, d) for i in range(1, n + 1)) - 1.0)
            worst_float = max(worst_float, float_dev)
            if float_dev >= float_tol:
                failures.append(f"float sum off by {float_dev:.2e} at n={n}, d={d}")

    m = 10**6
    for n, d in ((100, 2), (100, 4), (1000, 3), (17, 6)):
        dev = abs(float(prediction_curve(n, d, m).values.sum()) - m)
        if dev > 1e-9 * m:
            failures.append(f"curve sum off by {dev:.2e} at n={n}, d={d}")

    from .process import run

    for n, m_run, d in ((50, 20000, 2), (7, 1000, 3), (3, 500, 1)):
        config = ProcessConfig(
            n=n, m=m_run, d=d, seed=_SEED + 14, snapshot_every=max(1, m_run // 7)
        )
        loads, trace = run(config)
        if int(loads.sum()) != m_run:
            failures.append(f"final sum {int(loads.sum())} != {m_run} at n={n}, d={d}")
        if not np.array_equal(trace.loads.sum(axis=1), trace.times):
            failures.append(f"snapshot sums drift at n={n}, d={d}")

    for n, m_o, d in ((2, 6, 2), (3, 5, 2), (4, 4, 3), (5, 3, 1)):
        mass = exact_distribution(n, m_o, d).total_mass()
        if mass != 1:
            failures.append(f"oracle mass {mass} at n={n}, m={m_o}, d={d}")

    return CheckResult(
        name="exact_identities",
        passed=not failures,
        measured=(
            f"worst float probability-sum deviation {worst_float:.2e}"
            if not failures
            else "; ".join(failures[:3])
        ),
        tolerance=f"rational identities exact; float sums within {float_tol:g}",
        claim="probability, conservation, and mass identities hold",
    )


def check_corollary_gap(tolerance=None, jobs=None) -> CheckResult:
    """Power-law approximation within d^2 * m / n^2 of the exact prediction."""
    scale = 1.0 if tolerance is None else tolerance
    m = 10**6
    worst = 0.0
    for n in (100, 1000):
        for d in (2, 3, 4):
            allowance = scale * d * d * m / (n * n)
            for tenth in range(1, 11):
                i = tenth * n // 10
                diff = abs(power_law_load(i / n, d, m, n) - expected_load(i, n, d, m))
                worst = max(worst, diff / allowance)
    return CheckResult(
        name="corollary_gap",
        passed=worst <= 1.0,
        measured=f"worst |power law - exact| at {worst:.3f}x the allowance",
        tolerance="<= d^2 * m / n^2 at every tenth relative rank",
        claim="the power-law form approximates the exact curve to O(m/n^2)",
    )


def check_determinism(tolerance=None, jobs=None) -> CheckResult:
    """Identical specs produce byte-identical CSVs at any parallelism degree."""
    spec = ExperimentSpec(
        n=100, m=10**5, d=2, seed=_SEED + 15, trials=8,
        outputs=("aggregate", "figure"),
    )
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        runs = {
            "a": run_experiment(spec, tmp / "a", jobs=4),
            "b": run_experiment(spec, tmp / "b", jobs=4),
            "serial": run_experiment(spec, tmp / "serial", jobs=1),
        }
        blobs = {
            key: {art: path.read_bytes() for art, path in paths.items()}
            for key, paths in runs.items()
        }
    identical = blobs["a"] == blobs["b"] == blobs["serial"]
    return CheckResult(
        name="determinism",
        passed=identical,
        measured="byte-identical" if identical else "outputs differ",
        tolerance="equal bytes across reruns and thread counts",
        claim="experiment outputs are pure functions of the spec",
    )


def check_stabilization(tolerance=None, jobs=None) -> CheckResult:
    """Rank order locks strictly before the run ends in >= 95% of trials."""
    required = 0.95 if tolerance is None else tolerance
    n, m, trials = 5, 10**4, 200
    config = ProcessConfig(n=n, m=m, d=2, seed=_SEED + 16, snapshot_every=1)
    runs = run_trials(config, trials, jobs=jobs)
    settled = sum(
        rank_stabilization_time(r.trace) is not None for r in runs
    )
    fraction = settled / trials
    return CheckResult(
        name="stabilization",
        passed=fraction >= required,
        measured=f"rank order settled in {fraction:.3f} of {trials} trials",
        tolerance=f">= {required}",
        claim="bin ranks stop reversing well before the run ends at n=5, d=2",
    )


CHECKS = {
    "figure_d2": check_figure_d2,
    "figure_d3": check_figure_d3,
    "figure_d4": check_figure_d4,
    "oracle_exact": check_oracle_exact,
    "oracle_tv": check_oracle_tv,
    "uniform_d1": check_uniform_d1,
    "oracle_multinomial": check_oracle_multinomial,
    "swap_bound": check_swap_bound,
    "exact_identities": check_exact_identities,
    "corollary_gap": check_corollary_gap,
    "determinism": check_determinism,
    "stabilization": check_stabilization,
}


def run_checks(
    names: list[str] | None = None,
    overrides: dict[str, float] | None = None,
    jobs: int | None = None,
) -> list[CheckResult]:
    """Run the named checks (all by default) with optional tolerance overrides."""
    selected = list(CHECKS) if names is None else list(names)
    unknown = [name for name in selected if name not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; known: {list(CHECKS)}")
    overrides = overrides or {}
    bad_keys = sorted(set(overrides) - set(CHECKS))
    if bad_keys:
        raise ValueError(f"unknown tolerance overrides {bad_keys}; known: {list(CHECKS)}")
    return [
        CHECKS[name](tolerance=overrides.get(name), jobs=jobs) for name in selected
    ]
