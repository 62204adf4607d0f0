"""Run loop, replication, hyper-parameter sweeps and result files."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import typing
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .core import (
    ArmStatistics,
    BaselineParams,
    ErUcbParams,
    init_statistics,
    select_classical_ucb,
    select_epsilon_greedy,
    select_erucb,
    select_random,
    select_softmax,
    update_statistics,
)
from .environments import PRESETS, RngStream, make_external_env, make_synthetic_env
from .errors import ParameterError
from .regret import (
    GaussianArmSpec,
    RegretOracle,
    Trajectory,
    build_oracle,
    empirical_regret,
    ground_truth_index,
)

STRATEGIES = ("er-ucb", "er-ucb-generic", "c-ucb", "epsilon-greedy", "softmax", "random")
# not a bandit: always plays the known best arm, used as the regret-study reference
GROUND_TRUTH = "ground-truth"
TABLE1_STRATEGIES = ("er-ucb", "c-ucb", "epsilon-greedy", "softmax", "random")


@dataclass(frozen=True)
class ExperimentConfig:
    env: str = "paper7"
    external_cmd: str | None = None
    arms: int | None = None
    strategy: str = "er-ucb"
    theta: float = 0.01
    gamma: float = 20.0
    beta: float = 0.85
    alpha: float = 4.0
    epsilon: float = 0.1
    tau: float = 0.1
    budget: int = 1000
    replications: int = 10
    seed: int = 0
    rho: float = 1.0
    timeout: float = 60.0
    stride: int = 10
    out: str | None = None
    format: str = "csv"

    @property
    def is_external(self) -> bool:
        return self.env == "external"

    def arm_specs(self) -> tuple[GaussianArmSpec, ...] | None:
        if self.is_external:
            return None
        try:
            return PRESETS[self.env]
        except KeyError:
            raise ParameterError(f"unknown environment {self.env!r}") from None

    @property
    def arm_count(self) -> int:
        if self.is_external:
            if self.arms is None:
                raise ParameterError("external environment needs an arm count")
            return self.arms
        return len(self.arm_specs())  # type: ignore[arg-type]

    def erucb_params(self) -> ErUcbParams:
        return ErUcbParams(theta=self.theta, gamma=self.gamma, beta=self.beta, alpha=self.alpha)

    def baseline_params(self) -> BaselineParams:
        return BaselineParams(epsilon=self.epsilon, tau=self.tau)

    def oracle(self) -> RegretOracle | None:
        specs = self.arm_specs()
        if specs is None:
            return None
        return build_oracle(specs, self.rho, self.theta, self.beta)

    def validate(self) -> None:
        if self.strategy not in STRATEGIES + (GROUND_TRUTH,):
            raise ParameterError(f"unknown strategy {self.strategy!r}")
        if self.is_external:
            if not self.external_cmd:
                raise ParameterError("external environment needs --external-cmd")
            if self.strategy == GROUND_TRUTH:
                raise ParameterError("ground-truth player needs a synthetic environment")
        k = self.arm_count
        if k < 1:
            raise ParameterError("no arms")
        if self.budget < k:
            raise ParameterError(f"budget {self.budget} cannot cover {k} initialization pulls")
        if self.replications < 1:
            raise ParameterError("replications must be >= 1")
        if self.stride < 1:
            raise ParameterError("stride must be >= 1")
        if self.format not in ("csv", "structured"):
            raise ParameterError(f"unknown format {self.format!r}")
        self.erucb_params()
        self.baseline_params()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


Selector = Callable[[Sequence[ArmStatistics], int, np.random.Generator], int]


def make_selector(config: ExperimentConfig) -> tuple[Selector, bool]:
    """Returns ``(select, needs_init)`` for the configured strategy."""
    name = config.strategy
    beta = config.beta
    if name in ("er-ucb", "er-ucb-generic"):
        params = config.erucb_params()
        variant = "practical" if name == "er-ucb" else "generic"
        return (lambda s, t, rng: select_erucb(s, t, params, variant)[0]), True
    base = config.baseline_params()
    if name == "c-ucb":
        return (lambda s, t, rng: select_classical_ucb(s, t, base, beta)), True
    if name == "epsilon-greedy":
        return (lambda s, t, rng: select_epsilon_greedy(s, rng, base, beta)), True
    if name == "softmax":
        return (lambda s, t, rng: select_softmax(s, rng, base, beta)), True
    if name == "random":
        return (lambda s, t, rng: select_random(s, rng)), True
    if name == GROUND_TRUTH:
        best = ground_truth_index(config.arm_specs(), config.theta)  # type: ignore[arg-type]
        return (lambda s, t, rng: best), False
    raise ParameterError(f"unknown strategy {name!r}")


def build_env(config: ExperimentConfig, stream: RngStream):
    if config.is_external:
        return make_external_env(config.external_cmd, config.arm_count, config.timeout)  # type: ignore[arg-type]
    return make_synthetic_env(config.arm_specs(), stream)  # type: ignore[arg-type]


@dataclass
class RunSummary:
    pull_counts: list[int]
    exploitation_rates: list[float]
    best_feedback: float
    best_arm: int
    best_trial: int
    most_exploited_arm: int
    trajectory: Trajectory
    regret: float | None = None


def _first_argmax(values: Sequence[float]) -> int:
    return int(np.argmax(values))


def run_once(config: ExperimentConfig, stream: RngStream, env=None) -> RunSummary:
    """One pass of the bandit loop: pull every arm once, then select, sample, update.

    ``env`` overrides the environment built from ``config`` (used by tests
    and by callers that already own an evaluator).
    """
    config.validate()
    select, needs_init = make_selector(config)
    rng = stream.strategy_generator()
    own_env = env is None
    if own_env:
        env = build_env(config, stream)
    try:
        k = env.arm_count
        n = config.budget
        traj = Trajectory(rho=config.rho)
        t = 1
        if needs_init:
            first = []
            for i in range(k):
                x = env.arms[i].sample(t)
                first.append(x)
                traj.append(i, x)
                t += 1
            stats = init_statistics(first, config.beta)
        else:
            stats = [ArmStatistics(0, 0.0, 0.0, -math.inf) for _ in range(k)]
        for t in range(t, n + 1):
            i = select(stats, t, rng)
            x = env.arms[i].sample(t)
            stats[i] = update_statistics(stats[i], x, config.beta)
            traj.append(i, x)
    finally:
        if own_env:
            env.close()

    counts = [s.pull_count for s in stats]
    best_trial = _first_argmax(traj.feedbacks)
    oracle = config.oracle() if own_env else None
    return RunSummary(
        pull_counts=counts,
        exploitation_rates=[c / n for c in counts],
        best_feedback=traj.feedbacks[best_trial],
        best_arm=traj.selections[best_trial],
        best_trial=best_trial + 1,
        most_exploited_arm=_first_argmax(counts),
        trajectory=traj,
        regret=empirical_regret(traj, oracle)[-1] if oracle is not None else None,
    )


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if len(arr) < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1))


@dataclass
class ReplicatedSummary:
    """Mean and sample standard deviation across replications.

    With a single replication every std field is 0 and ``single_run`` is set.
    """

    config: ExperimentConfig
    runs: list[RunSummary] = field(default_factory=list)

    @property
    def single_run(self) -> bool:
        return len(self.runs) == 1

    @property
    def best_feedback(self) -> tuple[float, float]:
        return _mean_std([r.best_feedback for r in self.runs])

    @property
    def exploitation_rates(self) -> tuple[list[float], list[float]]:
        rates = np.array([r.exploitation_rates for r in self.runs])
        mean = rates.mean(axis=0)
        std = rates.std(axis=0, ddof=1) if len(self.runs) > 1 else np.zeros_like(mean)
        return mean.tolist(), std.tolist()

    @property
    def regret(self) -> tuple[float, float] | None:
        if any(r.regret is None for r in self.runs):
            return None
        return _mean_std([r.regret for r in self.runs])  # type: ignore[misc]

    @property
    def best_arms(self) -> list[int]:
        return [r.best_arm for r in self.runs]

    @property
    def most_exploited_arms(self) -> list[int]:
        return [r.most_exploited_arm for r in self.runs]


def run_replicated(config: ExperimentConfig, stream_offset: int = 0) -> ReplicatedSummary:
    config.validate()
    agg = ReplicatedSummary(config)
    for r in range(config.replications):
        agg.runs.append(run_once(config, RngStream(config.seed, stream_offset + r)))
    return agg


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

SWEEP_DEFAULTS: dict[str, tuple[float, float, dict[str, float]]] = {
    "theta": (0.0001, 0.5, {"gamma": 20.0, "beta": 0.85}),
    "gamma": (0.0, 50.0, {"beta": 0.85, "theta": 0.01}),
    "beta": (0.0, 1.5, {"theta": 0.01, "gamma": 20.0}),
}


@dataclass(frozen=True)
class SweepSpec:
    param: str
    lo: float
    hi: float
    samples: int = 100
    fixed: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.param not in SWEEP_DEFAULTS:
            raise ParameterError(f"cannot sweep {self.param!r}")
        if not self.lo < self.hi:
            raise ParameterError(f"empty sweep range [{self.lo}, {self.hi}]")
        if self.samples < 2:
            raise ParameterError("a sweep needs at least 2 samples")
        if self.param in self.fixed:
            raise ParameterError(f"{self.param} cannot be both swept and fixed")

    @classmethod
    def default(cls, param: str, samples: int = 100) -> SweepSpec:
        if param not in SWEEP_DEFAULTS:
            raise ParameterError(f"cannot sweep {param!r}")
        lo, hi, fixed = SWEEP_DEFAULTS[param]
        return cls(param, lo, hi, samples, dict(fixed))

    def values(self) -> list[float]:
        return np.linspace(self.lo, self.hi, self.samples).tolist()


class SweepRow(NamedTuple):
    param_name: str
    param_value: float
    arm: int  # 1-based
    mean_exploitation_rate: float


def run_sweep(spec: SweepSpec, config: ExperimentConfig) -> list[SweepRow]:
    rows = []
    for point, value in enumerate(spec.values()):
        cfg = dataclasses.replace(config, **spec.fixed, **{spec.param: value})
        # sweeps report rates only; the oracle's best-arm mismatch notice is noise here
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message="arm with the largest tail")
            agg = run_replicated(cfg, stream_offset=point * cfg.replications)
        mean, _ = agg.exploitation_rates
        rows.extend(SweepRow(spec.param, value, i + 1, m) for i, m in enumerate(mean))
    return rows


# ---------------------------------------------------------------------------
# regret study
# ---------------------------------------------------------------------------


class RegretRow(NamedTuple):
    t: int
    strategy_count_mean: float
    truth_expectation: float


def run_regret_study(config: ExperimentConfig) -> list[RegretRow]:
    """Mean cumulative count of feedbacks >= rho per trial, next to ``t * p_star``."""
    if config.is_external:
        raise ParameterError("the regret study needs a synthetic environment")
    if config.budget == 0:
        return []
    oracle = config.oracle()
    agg = run_replicated(config)
    counts = np.mean([r.trajectory.extreme_counts for r in agg.runs], axis=0)
    return [
        RegretRow(t, float(c), t * oracle.p_star)  # type: ignore[union-attr]
        for t, c in enumerate(counts, start=1)
    ]


def stride_rows(rows: Sequence[RegretRow], stride: int) -> list[RegretRow]:
    """Rows at every ``stride``-th trial, always keeping the last one."""
    if not rows:
        return []
    kept = [r for r in rows if r.t % stride == 0]
    if kept[-1:] != [rows[-1]]:
        kept.append(rows[-1])
    return kept


# ---------------------------------------------------------------------------
# strategy comparison
# ---------------------------------------------------------------------------


class Table1Row(NamedTuple):
    strategy: str
    best_feedback_mean: float
    best_feedback_std: float
    best_arms: str  # 1-based, comma separated, one per replication
    most_exploited_arms: str
    rate_arm1_mean: float
    rate_arm1_std: float


def _arm_list(indices: Iterable[int]) -> str:
    return ",".join(str(i + 1) for i in indices)


def table1(config: ExperimentConfig, strategies: Sequence[str] = TABLE1_STRATEGIES) -> list[Table1Row]:
    rows = []
    for name in strategies:
        agg = run_replicated(dataclasses.replace(config, strategy=name))
        bf_mean, bf_std = agg.best_feedback
        rate_mean, rate_std = agg.exploitation_rates
        rows.append(
            Table1Row(
                name,
                bf_mean,
                bf_std,
                _arm_list(agg.best_arms),
                _arm_list(agg.most_exploited_arms),
                rate_mean[0],
                rate_std[0],
            )
        )
    return rows


def format_table1(rows: Sequence[Table1Row]) -> str:
    header = f"{'Method':<16}{'X*':>16}  {'i_X*':<22}{'max_i R_i':<22}{'R_1':>14}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.strategy:<16}{r.best_feedback_mean:>8.2f} +/- {r.best_feedback_std:<4.2f}  "
            f"{r.best_arms:<22}{r.most_exploited_arms:<22}"
            f"{r.rate_arm1_mean:>6.2f} +/- {r.rate_arm1_std:.2f}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# result files
# ---------------------------------------------------------------------------


class RunRow(NamedTuple):
    replication: int
    arm: int  # 1-based
    pull_count: int
    exploitation_rate: float
    best_feedback: float
    best_arm: int  # 1-based


def run_rows(agg: ReplicatedSummary) -> list[RunRow]:
    return [
        RunRow(rep, i + 1, c, rate, run.best_feedback, run.best_arm + 1)
        for rep, run in enumerate(agg.runs)
        for i, (c, rate) in enumerate(zip(run.pull_counts, run.exploitation_rates))
    ]


def summary_to_dict(agg: ReplicatedSummary) -> dict:
    bf_mean, bf_std = agg.best_feedback
    rate_mean, rate_std = agg.exploitation_rates
    regret = agg.regret
    return {
        "config": agg.config.to_dict(),
        "single_run": agg.single_run,
        "best_feedback": {"mean": bf_mean, "std": bf_std},
        "exploitation_rates": {"mean": rate_mean, "std": rate_std},
        "regret": None if regret is None else {"mean": regret[0], "std": regret[1]},
        "best_arms": [i + 1 for i in agg.best_arms],
        "most_exploited_arms": [i + 1 for i in agg.most_exploited_arms],
        "runs": [
            {
                "replication": rep,
                "pull_counts": run.pull_counts,
                "exploitation_rates": run.exploitation_rates,
                "best_feedback": run.best_feedback,
                "best_arm": run.best_arm + 1,
                "best_trial": run.best_trial,
                "most_exploited_arm": run.most_exploited_arm + 1,
                "regret": run.regret,
                "selections": [i + 1 for i in run.trajectory.selections],
                "feedbacks": run.trajectory.feedbacks,
            }
            for rep, run in enumerate(agg.runs)
        ],
    }


def rows_to_csv(rows: Sequence[NamedTuple], row_type: type[NamedTuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(row_type._fields)
    for r in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def rows_from_csv(text: str, row_type: type[NamedTuple]) -> list:
    hints = typing.get_type_hints(row_type)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != list(row_type._fields):
        raise ValueError(f"expected columns {row_type._fields}, got {reader.fieldnames}")
    return [row_type(**{k: hints[k](v) for k, v in rec.items()}) for rec in reader]


def render(result, fmt: str, row_type: type[NamedTuple] | None = None) -> str:
    """Serialize a summary or a list of report rows to CSV or JSON text."""
    if isinstance(result, ReplicatedSummary):
        if fmt == "csv":
            return rows_to_csv(run_rows(result), RunRow)
        return json.dumps(summary_to_dict(result), indent=2, sort_keys=True) + "\n"
    rows = list(result)
    if fmt == "csv":
        if row_type is None:
            if not rows:
                raise ValueError("cannot infer CSV columns from an empty table")
            row_type = type(rows[0])
        return rows_to_csv(rows, row_type)
    return json.dumps([r._asdict() for r in rows], indent=2) + "\n"


def emit_results(
    result,
    path: str | os.PathLike,
    fmt: str = "csv",
    row_type: type[NamedTuple] | None = None,
) -> None:
    text = render(result, fmt, row_type)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {os.fspath(path)!r}: {exc.strerror or exc}") from exc
