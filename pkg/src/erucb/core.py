"""Arm statistics and arm-selection strategies.

Every strategy works off the same per-arm store, :class:`ArmStatistics`,
which keeps running means of the shifted feedback ``x - beta`` and of its
square.  Baselines recover the raw mean as ``mean_shifted + beta``.

Arm indices are 0-based throughout the library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import ParameterError

Variant = Literal["practical", "generic"]


@dataclass
class ArmStatistics:
    pull_count: int
    mean_shifted: float
    mean_shifted_sq: float
    best_feedback: float


@dataclass(frozen=True)
class PsiTransform:
    """The inverse conjugate ``(psi*)^-1`` used to size the exploration bonus."""

    name: str
    inverse_conjugate: Callable[[float], float] = field(compare=False)

    def __call__(self, y: float) -> float:
        return self.inverse_conjugate(y)


def _hoeffding_inverse(y: float) -> float:
    # psi*(eps) = 2 eps^2  =>  (psi*)^-1(y) = sqrt(y / 2)
    return math.sqrt(y / 2.0)


HOEFFDING = PsiTransform("hoeffding", _hoeffding_inverse)


@dataclass(frozen=True)
class ErUcbParams:
    theta: float = 0.01
    gamma: float = 20.0
    beta: float = 0.85
    alpha: float = 4.0
    transform: PsiTransform = HOEFFDING

    def __post_init__(self) -> None:
        if not (0.0 < self.theta <= 1.0):
            raise ParameterError(f"theta must be in (0, 1], got {self.theta}")
        if self.gamma < 0.0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if self.beta < 0.0:
            raise ParameterError(f"beta must be >= 0, got {self.beta}")
        if not self.alpha > 2.0:
            raise ParameterError(f"alpha must be > 2, got {self.alpha}")


@dataclass(frozen=True)
class BaselineParams:
    epsilon: float = 0.1
    tau: float = 0.1
    ucb_scale: float = 2.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.epsilon <= 1.0):
            raise ParameterError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if not self.tau > 0.0:
            raise ParameterError(f"tau must be > 0, got {self.tau}")
        if not self.ucb_scale > 0.0:
            raise ParameterError(f"ucb_scale must be > 0, got {self.ucb_scale}")


@dataclass(frozen=True)
class ScoreBreakdown:
    exploitation: float
    exploration: float
    total: float


def _log_trial(t: float) -> float:
    # t = 1 contributes no exploration
    return 0.0 if t <= 1 else math.log(t)


def _check_theta(theta: float) -> None:
    if not theta > 0.0:
        raise ParameterError(f"theta must be > 0, got {theta}")


def _check_states(states: Sequence[ArmStatistics]) -> None:
    if len(states) == 0:
        raise ParameterError("no arms")


def _argmax(values: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------


def init_statistics(first_feedbacks: Sequence[float], beta: float) -> list[ArmStatistics]:
    """One pull per arm, in index order."""
    if len(first_feedbacks) == 0:
        raise ParameterError("no arms")
    out = []
    for x in first_feedbacks:
        y = x - beta
        out.append(ArmStatistics(1, y, y * y, x))
    return out


def update_statistics(state: ArmStatistics, feedback: float, beta: float) -> ArmStatistics:
    """Fold one feedback into ``state`` using the running-mean recurrences.

    Feedbacks are taken as-is; nothing is clamped to [0, 1].
    """
    n = state.pull_count
    y = feedback - beta
    return ArmStatistics(
        pull_count=n + 1,
        mean_shifted=(n * state.mean_shifted + y) / (n + 1),
        mean_shifted_sq=(n * state.mean_shifted_sq + y * y) / (n + 1),
        best_feedback=max(state.best_feedback, feedback),
    )


# ---------------------------------------------------------------------------
# ER-UCB scores
# ---------------------------------------------------------------------------


def exploitation_score(state: ArmStatistics, theta: float) -> float:
    _check_theta(theta)
    return state.mean_shifted + math.sqrt(state.mean_shifted_sq / theta)


def exploration_bonus_hoeffding(pull_count: int, t: float, theta: float) -> float:
    """Hoeffding exploration item ``sqrt(2 ln t / T) + sqrt(sqrt(2 ln t / T) / theta)``."""
    if pull_count < 1:
        raise ParameterError("unpulled arm")
    _check_theta(theta)
    width = math.sqrt(2.0 * _log_trial(t) / pull_count)
    return width + math.sqrt(width / theta)


def exploration_bonus_generic(pull_count: int, t: float, params: ErUcbParams) -> float:
    if pull_count < 1:
        raise ParameterError("unpulled arm")
    g = params.transform(params.alpha * _log_trial(t) / pull_count)
    return g + math.sqrt(g / params.theta)


def erucb_scores(
    states: Sequence[ArmStatistics],
    t: float,
    params: ErUcbParams,
    variant: Variant = "practical",
) -> list[ScoreBreakdown]:
    _check_states(states)
    out = []
    for s in states:
        omega = exploitation_score(s, params.theta)
        if variant == "practical":
            psi = exploration_bonus_hoeffding(s.pull_count, t, params.theta)
            total = params.gamma * omega + psi
        elif variant == "generic":
            psi = exploration_bonus_generic(s.pull_count, t, params)
            total = omega + psi
        else:
            raise ParameterError(f"unknown ER-UCB variant {variant!r}")
        out.append(ScoreBreakdown(omega, psi, total))
    return out


def select_erucb(
    states: Sequence[ArmStatistics],
    t: float,
    params: ErUcbParams,
    variant: Variant = "practical",
) -> tuple[int, list[ScoreBreakdown]]:
    """Pick the arm with the largest ER-UCB score.

    ``practical`` scores ``gamma * exploitation + hoeffding_bonus``;
    ``generic`` scores ``exploitation + psi_bonus`` and ignores gamma.
    Ties go to the lowest index.
    """
    scores = erucb_scores(states, t, params, variant)
    return _argmax([s.total for s in scores]), scores


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------


def raw_means(states: Sequence[ArmStatistics], beta: float) -> list[float]:
    return [s.mean_shifted + beta for s in states]


def select_classical_ucb(
    states: Sequence[ArmStatistics],
    t: float,
    params: BaselineParams,
    beta: float = 0.0,
) -> int:
    _check_states(states)
    log_t = _log_trial(t)
    scores = []
    for s in states:
        if s.pull_count < 1:
            raise ParameterError("unpulled arm")
        scores.append(s.mean_shifted + beta + math.sqrt(params.ucb_scale * log_t / s.pull_count))
    return _argmax(scores)


def select_epsilon_greedy(
    states: Sequence[ArmStatistics],
    rng: np.random.Generator,
    params: BaselineParams,
    beta: float = 0.0,
) -> int:
    _check_states(states)
    if rng.random() < params.epsilon:
        return int(rng.integers(len(states)))
    return _argmax(raw_means(states, beta))


def softmax_probabilities(means: Sequence[float], tau: float) -> np.ndarray:
    if not tau > 0.0:
        raise ParameterError(f"tau must be > 0, got {tau}")
    z = np.asarray(means, dtype=float) / tau
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()


def select_softmax(
    states: Sequence[ArmStatistics],
    rng: np.random.Generator,
    params: BaselineParams,
    beta: float = 0.0,
) -> int:
    _check_states(states)
    probs = softmax_probabilities(raw_means(states, beta), params.tau)
    return int(rng.choice(len(states), p=probs))


def select_random(states: Sequence[ArmStatistics], rng: np.random.Generator) -> int:
    _check_states(states)
    return int(rng.integers(len(states)))
