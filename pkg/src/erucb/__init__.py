"""Extreme-region UCB bandits for allocating a trial budget across search arms."""

from .core import (
    HOEFFDING,
    ArmStatistics,
    BaselineParams,
    ErUcbParams,
    PsiTransform,
    ScoreBreakdown,
    exploitation_score,
    exploration_bonus_generic,
    exploration_bonus_hoeffding,
    init_statistics,
    select_classical_ucb,
    select_epsilon_greedy,
    select_erucb,
    select_random,
    select_softmax,
    update_statistics,
)
from .environments import PRESETS, RngStream, make_external_env, make_synthetic_env
from .errors import ArmError, ParameterError, ProtocolError
from .experiment import (
    ExperimentConfig,
    RunSummary,
    SweepSpec,
    emit_results,
    run_once,
    run_regret_study,
    run_replicated,
    run_sweep,
    table1,
)
from .regret import (
    GaussianArmSpec,
    RegretOracle,
    Trajectory,
    build_oracle,
    empirical_regret,
    exact_score,
    extreme_prob,
    ground_truth_index,
    theoretical_bound,
)

__version__ = "0.1.0"
