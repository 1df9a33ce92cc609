"""Experiment specification: multi-trial runs plus requested artifacts.

An :class:`ExperimentSpec` is the unit the CLI works with. It serializes
to a human-editable JSON file (see ``configs/example.json``) and
round-trips losslessly; every derived seed is a pure function of
``(spec seed, trial index, purpose tag)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import aggregate_trials, deviation_report, pair_gap_series, run_trials
from .process import ConfigError, Policy, ProcessConfig
from .theory import PredictionCurve, prediction_curve
from . import output

ARTIFACTS = ("aggregate", "figure", "prediction", "gaps")
TIE_SEED_POLICY = "master-trial-purpose"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one experiment and its output files."""

    n: int
    m: int
    d: int
    policy: Policy = Policy.UNFAIR
    seed: int = 0
    snapshot_every: int | None = None
    trials: int = 1
    tie_seed_policy: str = TIE_SEED_POLICY
    outputs: tuple[str, ...] = ("aggregate", "figure")
    gap_pair: tuple[int, int] = (1, 2)
    tolerances: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "gap_pair", tuple(self.gap_pair))
        object.__setattr__(self, "tolerances", dict(self.tolerances))
        problems: dict[str, str] = {}
        try:
            self.process()
        except ConfigError as exc:
            problems.update({f: "invalid" for f in exc.fields})
            problems["_process"] = str(exc)
        if self.trials < 1:
            problems["trials"] = f"must be >= 1, got {self.trials}"
        if self.tie_seed_policy != TIE_SEED_POLICY:
            problems["tie_seed_policy"] = (
                f"only {TIE_SEED_POLICY!r} is supported, got {self.tie_seed_policy!r}"
            )
        unknown = [o for o in self.outputs if o not in ARTIFACTS]
        if unknown:
            problems["outputs"] = f"unknown artifacts {unknown}; known: {list(ARTIFACTS)}"
        if "gaps" in self.outputs:
            if self.snapshot_every is None:
                problems["snapshot_every"] = "the gaps artifact requires a snapshot stride"
            if len(self.gap_pair) != 2 or self.gap_pair[0] == self.gap_pair[1]:
                problems["gap_pair"] = f"need two distinct labels, got {self.gap_pair}"
            elif not all(1 <= g <= self.n for g in self.gap_pair):
                problems["gap_pair"] = f"labels must lie in 1..{self.n}, got {self.gap_pair}"
        if any(not isinstance(v, (int, float)) or v < 0 for v in self.tolerances.values()):
            problems["tolerances"] = "override values must be non-negative numbers"
        if problems:
            raise ConfigError(problems)

    def process(self) -> ProcessConfig:
        return ProcessConfig(
            n=self.n,
            m=self.m,
            d=self.d,
            policy=self.policy,
            seed=self.seed,
            snapshot_every=self.snapshot_every,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "d": self.d,
            "policy": self.policy.value,
            "seed": self.seed,
            "snapshot_every": self.snapshot_every,
            "trials": self.trials,
            "tie_seed_policy": self.tie_seed_policy,
            "outputs": list(self.outputs),
            "gap_pair": list(self.gap_pair),
            "tolerances": dict(self.tolerances),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = {
            "n", "m", "d", "policy", "seed", "snapshot_every", "trials",
            "tie_seed_policy", "outputs", "gap_pair", "tolerances",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({k: "unknown field" for k in unknown})
        kwargs = dict(data)
        if "policy" in kwargs:
            try:
                kwargs["policy"] = Policy(kwargs["policy"])
            except ValueError:
                raise ConfigError(
                    {"policy": f"unknown policy {kwargs['policy']!r}; "
                               f"known: {[p.value for p in Policy]}"}
                ) from None
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        return cls.from_dict(json.loads(text))


def load_spec(path: str | Path) -> ExperimentSpec:
    return ExperimentSpec.from_json(Path(path).read_text(encoding="utf-8"))


def save_spec(spec: ExperimentSpec, path: str | Path) -> None:
    Path(path).write_text(spec.to_json(), encoding="utf-8")


def reference_curve(config: ProcessConfig) -> PredictionCurve:
    """Prediction to plot against: the rank curve for the max-of-d policy,
    the flat m/n line for the balancing baselines."""
    d_eff = config.d if config.policy is Policy.UNFAIR else 1
    return prediction_curve(config.n, d_eff, config.m)


def run_experiment(
    spec: ExperimentSpec,
    out_dir: str | Path,
    jobs: int | None = None,
    prefix: str = "",
) -> dict[str, Path]:
    """Run the trials and write every requested artifact; returns the paths.

    Byte-identical output for identical specs, independent of the
    parallelism degree.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = spec.process()
    trials = run_trials(config, spec.trials, jobs=jobs)
    aggregate = aggregate_trials([t.profile for t in trials], config)
    curve = reference_curve(config)
    report = deviation_report(aggregate, curve)
    meta = spec.to_dict()
    paths: dict[str, Path] = {}
    for artifact in spec.outputs:
        path = out_dir / f"{prefix}{artifact}.csv"
        if artifact == "aggregate":
            output.write_aggregate_csv(path, meta, aggregate, curve, report)
        elif artifact == "figure":
            output.write_figure_csv(path, meta, aggregate, curve)
        elif artifact == "prediction":
            output.write_prediction_csv(path, spec.n, spec.d, spec.m, meta)
        elif artifact == "gaps":
            series = pair_gap_series(trials[0].trace, *spec.gap_pair)
            output.write_gaps_csv(path, meta, series)
        paths[artifact] = path
    return paths
