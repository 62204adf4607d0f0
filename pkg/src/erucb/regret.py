"""Ground-truth quantities for Gaussian arms and extreme-region regret."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Sequence

from .errors import ParameterError


@dataclass(frozen=True)
class GaussianArmSpec:
    mean: float
    std_dev: float

    def __post_init__(self) -> None:
        if not self.std_dev > 0.0:
            raise ParameterError(f"std_dev must be > 0, got {self.std_dev}")


@dataclass(frozen=True)
class RegretOracle:
    rho: float
    extreme_probs: tuple[float, ...]
    p_star: float
    p_star_index: int
    theta_gaps: tuple[float, ...]
    gamma_gaps: tuple[float, ...]
    truth_index: int


@dataclass
class Trajectory:
    """Per-trial record of one run.  ``extreme_counts[t]`` counts feedbacks >= rho up to trial t+1."""

    selections: list[int] = field(default_factory=list)
    feedbacks: list[float] = field(default_factory=list)
    extreme_counts: list[int] = field(default_factory=list)
    rho: float = 1.0

    def append(self, arm: int, feedback: float) -> None:
        prev = self.extreme_counts[-1] if self.extreme_counts else 0
        self.selections.append(arm)
        self.feedbacks.append(feedback)
        self.extreme_counts.append(prev + (feedback >= self.rho))

    def __len__(self) -> int:
        return len(self.selections)


def extreme_prob(arm: GaussianArmSpec, rho: float) -> float:
    """``Pr[X >= rho]`` for ``X ~ N(mean, std_dev^2)``."""
    if not arm.std_dev > 0.0:
        raise ParameterError(f"std_dev must be > 0, got {arm.std_dev}")
    z = (rho - arm.mean) / arm.std_dev
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _argmax(values: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def ground_truth_index(arms: Sequence[GaussianArmSpec], theta: float) -> int:
    """Index maximizing ``mean + std_dev / sqrt(theta)``."""
    if not arms:
        raise ParameterError("no arms")
    if not theta > 0.0:
        raise ParameterError(f"theta must be > 0, got {theta}")
    k = math.sqrt(1.0 / theta)
    return _argmax([a.mean + k * a.std_dev for a in arms])


def exact_score(arm: GaussianArmSpec, theta: float, beta: float) -> float:
    """Extreme-region target at the true moments: ``(mu-beta) + sqrt((sigma^2 + (mu-beta)^2) / theta)``."""
    if not theta > 0.0:
        raise ParameterError(f"theta must be > 0, got {theta}")
    shift = arm.mean - beta
    return shift + math.sqrt((arm.std_dev**2 + shift * shift) / theta)


def build_oracle(
    arms: Sequence[GaussianArmSpec], rho: float, theta: float, beta: float
) -> RegretOracle:
    if not arms:
        raise ParameterError("no arms")
    probs = tuple(extreme_prob(a, rho) for a in arms)
    p_idx = _argmax(probs)
    p_star = probs[p_idx]
    scores = [exact_score(a, theta, beta) for a in arms]
    truth = _argmax(scores)
    if truth != p_idx:
        warnings.warn(
            f"arm with the largest tail probability ({p_idx}) differs from the "
            f"score-maximizing arm ({truth}) at beta={beta}, theta={theta}",
            stacklevel=2,
        )
    return RegretOracle(
        rho=rho,
        extreme_probs=probs,
        p_star=p_star,
        p_star_index=p_idx,
        theta_gaps=tuple(p_star - p for p in probs),
        gamma_gaps=tuple(scores[truth] - s for s in scores),
        truth_index=truth,
    )


def empirical_regret(selections: Sequence[int] | Trajectory, oracle: RegretOracle) -> list[float]:
    """Cumulative ``R_t = t * p_star - sum_{s<=t} p_{I_s}`` for every prefix."""
    if isinstance(selections, Trajectory):
        selections = selections.selections
    k = len(oracle.extreme_probs)
    out = []
    collected = 0.0
    for t, arm in enumerate(selections, start=1):
        if not 0 <= arm < k:
            raise ParameterError(f"arm index {arm} out of range for {k} arms")
        collected += oracle.extreme_probs[arm]
        out.append(t * oracle.p_star - collected)
    return out


def gap_count_regret(selections: Sequence[int], oracle: RegretOracle) -> list[float]:
    """Same quantity as :func:`empirical_regret`, via ``sum_i Theta_i * T_i(t)``."""
    k = len(oracle.theta_gaps)
    counts = [0] * k
    out = []
    for arm in selections:
        if not 0 <= arm < k:
            raise ParameterError(f"arm index {arm} out of range for {k} arms")
        counts[arm] += 1
        out.append(sum(g * c for g, c in zip(oracle.theta_gaps, counts)))
    return out


def theoretical_bound(
    oracle: RegretOracle,
    n: float,
    alpha: float,
    theta: float,
    form: Literal["generic", "hoeffding"] = "generic",
) -> float:
    """Upper bound on the regret after ``n`` trials, with ``psi*(eps) = 2 eps^2``.

    ``hoeffding`` reproduces the printed closed form, including its
    ``(1 - 1/theta)`` factor.
    """
    if not alpha > 2.0:
        raise ParameterError(f"alpha must be > 2, got {alpha}")
    if not theta > 0.0:
        raise ParameterError(f"theta must be > 0, got {theta}")
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    log_n = math.log(n)
    tail = (alpha + 2.0) / (alpha - 2.0)
    total = 0.0
    for big_theta, gap in zip(oracle.theta_gaps, oracle.gamma_gaps):
        if not gap > 0.0:
            continue
        if form == "generic":
            eps = gap**2 / (4.0 * (1.0 + 1.0 / theta) ** 2)
            term = alpha * log_n / (2.0 * eps**2)
        elif form == "hoeffding":
            term = 8.0 * alpha * log_n / (gap**4 / (1.0 - 1.0 / theta) ** 4)
        else:
            raise ParameterError(f"unknown bound form {form!r}")
        total += big_theta * (term + tail)
    return total
