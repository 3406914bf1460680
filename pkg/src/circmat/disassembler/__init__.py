"""Desk-scale disassembly surrogate: grid tasks, tabular goal-conditioned
learning, an exact planning oracle and the evaluation protocol that feeds
the circularity engine."""

from .env import DisassemblyEnv, EnvState, GridTooSmall, InvalidAction
from .oracle import OraclePolicy, PlanResult, StateSpaceTooLarge, plan_oracle, shortest_plan
from .policy import Hyperparams, PolicyFormatError, TabularPolicy
from .tasks import ALL_TASKS, TaskSpec, default_task
from .training import (
    DEFAULT_TRAIN_STEPS,
    EVAL_EPISODES,
    EVAL_SEED,
    FAILURE_STORAGE_S,
    SECONDS_PER_STEP,
    TrainingStats,
    eval_env,
    evaluate,
    run_evaluation,
    outcome_from_episodes,
    train,
    training_log_csv,
)

__all__ = [
    "ALL_TASKS",
    "DEFAULT_TRAIN_STEPS",
    "DisassemblyEnv",
    "EnvState",
    "EVAL_EPISODES",
    "EVAL_SEED",
    "FAILURE_STORAGE_S",
    "GridTooSmall",
    "Hyperparams",
    "InvalidAction",
    "OraclePolicy",
    "PlanResult",
    "PolicyFormatError",
    "SECONDS_PER_STEP",
    "StateSpaceTooLarge",
    "TabularPolicy",
    "TaskSpec",
    "TrainingStats",
    "default_task",
    "eval_env",
    "evaluate",
    "outcome_from_episodes",
    "plan_oracle",
    "run_evaluation",
    "shortest_plan",
    "train",
    "training_log_csv",
]
