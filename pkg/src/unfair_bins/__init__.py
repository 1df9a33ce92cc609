"""Max-of-d-choices ball allocation: simulator, exact oracle, and checks.

Place m balls into n bins; each ball draws d option bins uniformly with
replacement and lands in the most-loaded one (ties uniform over the
distinct tied bins). The resulting sorted loads follow a rank power law,
which this package simulates, predicts in closed form, cross-checks
against an exact rational-arithmetic oracle, and verifies statistically.
"""

from .analysis import (
    PairGapSeries,
    SortedProfile,
    TrialAggregate,
    TrialRun,
    aggregate_trials,
    deviation_report,
    empirical_profile_frequencies,
    pair_gap_series,
    rank_stabilization_time,
    run_trials,
    sample_sorted_profiles,
    sort_profile,
    swap_probability_estimate,
)
from .experiment import ExperimentSpec, load_spec, run_experiment, save_spec
from .oracle import (
    BudgetExceededError,
    ExactDistribution,
    exact_distribution,
    exact_sorted_means,
    evolve,
    tie_groups,
    total_variation,
    transition_probability,
)
from .process import (
    ConfigError,
    Policy,
    ProcessConfig,
    Trace,
    draw_option_set,
    place_ball,
    run,
)
from .seeding import derive_seed, make_generator
from .theory import (
    PhaseConstants,
    PredictionCurve,
    expected_load,
    gambler_ruin_bound,
    hoeffding_tail,
    phase_constants,
    power_law_load,
    prediction_curve,
    rank_hit_probability,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ConfigError",
    "ExactDistribution",
    "ExperimentSpec",
    "PairGapSeries",
    "PhaseConstants",
    "Policy",
    "PredictionCurve",
    "ProcessConfig",
    "SortedProfile",
    "Trace",
    "TrialAggregate",
    "TrialRun",
    "aggregate_trials",
    "derive_seed",
    "deviation_report",
    "draw_option_set",
    "empirical_profile_frequencies",
    "evolve",
    "exact_distribution",
    "exact_sorted_means",
    "expected_load",
    "gambler_ruin_bound",
    "hoeffding_tail",
    "load_spec",
    "make_generator",
    "pair_gap_series",
    "phase_constants",
    "place_ball",
    "power_law_load",
    "prediction_curve",
    "rank_hit_probability",
    "rank_stabilization_time",
    "run",
    "run_experiment",
    "run_trials",
    "sample_sorted_profiles",
    "save_spec",
    "sort_profile",
    "swap_probability_estimate",
    "tie_groups",
    "total_variation",
    "transition_probability",
]
