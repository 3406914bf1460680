"""Request and response schemas of the circularity service.

Scenario payloads travel as raw JSON objects and are validated by the core
validator so error reports keep their JSON-pointer paths; everything else is
typed here.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class IssueModel(BaseModel):
    path: str
    message: str


class NetworkSummary(BaseModel):
    n_v: int
    n_a: int
    n_c: int
    solids_topology: bool


class ValidateRequest(BaseModel):
    scenario: dict


class ValidateResponse(BaseModel):
    valid: bool
    errors: list[IssueModel] = Field(default_factory=list)
    summary: NetworkSummary | None = None


class LambdaRequest(BaseModel):
    scenario: dict
    delta_override: float | None = Field(default=None, gt=0)
    # Policy bytes for scenarios whose outcome references a trained policy;
    # the client reads the artifact and ships it inline.
    policy_b64: str | None = None
    eval_seed: int | None = None


class LambdaResponse(BaseModel):
    lambda_closed_form: float
    lambda_numeric: float
    lambda_approx: float
    lambda_rounded: float
    alpha: float
    t_f: float
    m0_bar: float
    s: float
    T_d: float
    mu: int
    delta: float
    segment_contributions: list[float]
    continuous_contribution: float
    text: str
    csv: str


class SweepRequest(BaseModel):
    scenario: dict
    var: str
    start: float
    stop: float
    steps: int = Field(ge=2)
    delta_override: float | None = Field(default=None, gt=0)


class SweepRowModel(BaseModel):
    var: str
    value: float
    lambda_exact: float
    lambda_approx: float
    alpha: float


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]


class TableRowModel(BaseModel):
    scenario: str
    m0_bar: float
    s: float
    T_d: float
    expected: float
    computed: float
    passed: bool


class ReproduceResponse(BaseModel):
    rows: list[TableRowModel]
    all_match: bool


class HyperparamsModel(BaseModel):
    learning_rate: float = 0.7
    discount: float = 0.98
    eps_start: float = 1.0
    eps_end: float = 0.0
    eps_decay_fraction: float = 0.8


class TrainRequest(BaseModel):
    task: str
    steps: int | None = Field(default=None, ge=0)
    seed: int = 0
    hyperparams: HyperparamsModel | None = None


class TrainStatsModel(BaseModel):
    r_start: float
    r_end: float
    zeta: float
    seed: int
    steps: int
    episodes: int


class TrainResponse(BaseModel):
    stats: TrainStatsModel
    # One row per finished training episode:
    # [global step at episode end, episode number, length, return]
    log: list[list[float]]
    policy_b64: str


class EvalRequest(BaseModel):
    task: str | None = None
    policy_b64: str
    episodes: int = Field(default=100, ge=1)
    eval_seed: int | None = None


class OutcomeModel(BaseModel):
    s: float
    T_d: float
    successes: int
    episodes: int
    mean_success_steps: float | None


class PipelineRequest(BaseModel):
    task: str
    steps: int | None = Field(default=None, ge=0)
    seed: int = 0
    scenario: dict
    delta_override: float | None = Field(default=None, gt=0)


class PipelineResponse(BaseModel):
    task: str
    seed: int
    steps: int
    r_start: float
    r_end: float
    zeta: float
    s: float
    T_d: float
    lambda_closed_form: float
    lambda_rounded: float
    t_f: float
    m0_bar: float
