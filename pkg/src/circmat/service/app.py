"""FastAPI service wrapping the circularity engine.

All computation lives in the core package; the service validates scenarios,
orchestrates train/evaluate/report chains and returns typed responses.
Scenario validation failures come back as HTTP 400 with the full issue list.
"""

from __future__ import annotations

import base64
import binascii
import json

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..circularity import (
    EmptyGrid,
    UnknownVariable,
    compute_report,
    lambda_closed_form,
    round_half_away,
    sensitivity_sweep,
)
from ..disassembler import (
    GridTooSmall,
    TabularPolicy,
    default_task,
    eval_env,
    evaluate,
    outcome_from_episodes,
    run_evaluation,
    train,
)
from ..disassembler.policy import Hyperparams
from ..disassembler.training import EVAL_SEED
from ..flows import DisassemblyOutcome, ScenarioParams
from ..scenario import (
    ScenarioFile,
    TASK_NAMES,
    ValidationError,
    bundled_scenario_path,
    validate_scenario,
)
from . import models

# The reference chain evaluated at the documented operating points; the
# reproduction endpoint recomputes each row and compares at 1-decimal display
# precision.
REFERENCE_ROWS = (
    ("table2_sac", -2.1),
    ("table2_tqc", -2.3),
    ("table2_td3", -3.1),
    ("table4", -6.3),
    ("table5", -7.2),
)


def _bad_request(issues) -> HTTPException:
    return HTTPException(
        status_code=400,
        detail={"errors": [{"path": i.path, "message": i.message} for i in issues]},
    )


def _error(message: str, path: str = "/") -> HTTPException:
    return HTTPException(status_code=400, detail={"errors": [{"path": path, "message": message}]})


def _load_scenario(payload: dict, delta_override: float | None = None) -> ScenarioFile:
    try:
        scenario = validate_scenario(payload)
    except ValidationError as exc:
        raise _bad_request(exc.issues) from exc
    if delta_override is not None:
        params = scenario.params
        scenario = ScenarioFile(
            network=scenario.network,
            materials=scenario.materials,
            params=ScenarioParams(
                t_2in4=params.t_2in4,
                T_t=params.T_t,
                T_r=params.T_r,
                T_i=params.T_i,
                delta=delta_override,
                l=params.l,
                continuous_rate=params.continuous_rate,
            ),
            outcome=scenario.outcome,
            rounding=scenario.rounding,
        )
    return scenario


def _decode_policy(policy_b64: str) -> TabularPolicy:
    try:
        blob = base64.b64decode(policy_b64, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise _error(f"policy payload is not valid base64: {exc}", "/policy") from exc
    try:
        return TabularPolicy.from_bytes(blob)
    except Exception as exc:  # malformed header, zlib or JSON payload
        raise _error(f"cannot load policy: {exc}", "/policy") from exc


def _resolve_outcome(
    scenario: ScenarioFile, policy_b64: str | None, eval_seed: int | None
) -> DisassemblyOutcome:
    if scenario.outcome.is_literal:
        return DisassemblyOutcome(s=scenario.outcome.s, T_d=scenario.outcome.T_d)
    if policy_b64 is None:
        raise _error(
            "scenario outcome references a policy; supply its bytes in policy_b64",
            "/outcome/policy",
        )
    policy = _decode_policy(policy_b64)
    task = scenario.outcome.task
    if policy.task != task:
        raise _error(
            f"policy was trained for {policy.task!r}, scenario expects {task!r}",
            "/outcome/task",
        )
    spec = default_task(task)
    return evaluate(policy, eval_env(spec, eval_seed if eval_seed is not None else EVAL_SEED))


def _task_spec(task: str):
    if task not in TASK_NAMES:
        raise _error(f"unknown task {task!r}; choose from {TASK_NAMES}", "/task")
    return default_task(task)


def create_app() -> FastAPI:
    app = FastAPI(title="circmat", version=__version__)

    @app.get("/health", response_model=models.HealthResponse)
    def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/scenario/validate", response_model=models.ValidateResponse)
    def scenario_validate(request: models.ValidateRequest) -> models.ValidateResponse:
        try:
            scenario = validate_scenario(request.scenario)
        except ValidationError as exc:
            return models.ValidateResponse(
                valid=False,
                errors=[models.IssueModel(path=i.path, message=i.message) for i in exc.issues],
            )
        net = scenario.network
        return models.ValidateResponse(
            valid=True,
            summary=models.NetworkSummary(
                n_v=net.n_v, n_a=net.n_a, n_c=net.n_c, solids_topology=True
            ),
        )

    @app.post("/lambda", response_model=models.LambdaResponse)
    def lambda_report(request: models.LambdaRequest) -> models.LambdaResponse:
        scenario = _load_scenario(request.scenario, request.delta_override)
        outcome = _resolve_outcome(scenario, request.policy_b64, request.eval_seed)
        report = compute_report(scenario.params, scenario.m0_bar, outcome)
        return models.LambdaResponse(
            lambda_closed_form=report.lambda_closed_form,
            lambda_numeric=report.lambda_numeric,
            lambda_approx=report.lambda_approx,
            lambda_rounded=round_half_away(report.lambda_closed_form, scenario.rounding),
            alpha=report.alpha,
            t_f=report.t_f,
            m0_bar=report.m0_bar,
            s=report.s,
            T_d=report.T_d,
            mu=report.mu,
            delta=report.delta,
            segment_contributions=list(report.segment_contributions),
            continuous_contribution=report.continuous_contribution,
            text=report.to_text(),
            csv=report.to_csv(),
        )

    @app.post("/sweep", response_model=models.SweepResponse)
    def sweep(request: models.SweepRequest) -> models.SweepResponse:
        scenario = _load_scenario(request.scenario, request.delta_override)
        if not scenario.outcome.is_literal:
            raise _error("sweeps need a literal outcome baseline", "/outcome")
        outcome = DisassemblyOutcome(s=scenario.outcome.s, T_d=scenario.outcome.T_d)
        if request.stop < request.start:
            raise _error("sweep range must have stop >= start", "/sweep")
        n = request.steps
        grid = [
            request.start + (request.stop - request.start) * i / (n - 1) for i in range(n)
        ]
        try:
            rows = sensitivity_sweep(
                scenario.params, scenario.m0_bar, outcome, {request.var: grid}
            )
        except (UnknownVariable, EmptyGrid) as exc:
            raise _error(str(exc), "/sweep/var") from exc
        return models.SweepResponse(
            rows=[
                models.SweepRowModel(
                    var=r.var,
                    value=r.value,
                    lambda_exact=r.lambda_exact,
                    lambda_approx=r.lambda_approx,
                    alpha=r.alpha,
                )
                for r in rows
            ]
        )

    @app.post("/tables/reproduce", response_model=models.ReproduceResponse)
    def reproduce_tables() -> models.ReproduceResponse:
        rows: list[models.TableRowModel] = []
        for name, expected in REFERENCE_ROWS:
            path = bundled_scenario_path(name)
            if not path.exists():
                raise _error(f"bundled scenario {name!r} is missing", f"/scenarios/{name}")
            try:
                payload = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise _error(f"bundled scenario {name!r} is corrupt: {exc}") from exc
            scenario = _load_scenario(payload)
            outcome = DisassemblyOutcome(s=scenario.outcome.s, T_d=scenario.outcome.T_d)
            lam, _ = lambda_closed_form(scenario.params, scenario.m0_bar, outcome)
            computed = round_half_away(lam, 1)
            rows.append(
                models.TableRowModel(
                    scenario=name,
                    m0_bar=scenario.m0_bar,
                    s=outcome.s,
                    T_d=outcome.T_d,
                    expected=expected,
                    computed=computed,
                    passed=computed == expected,
                )
            )
        return models.ReproduceResponse(rows=rows, all_match=all(r.passed for r in rows))

    @app.post("/train", response_model=models.TrainResponse)
    def train_endpoint(request: models.TrainRequest) -> models.TrainResponse:
        spec = _task_spec(request.task)
        hp = None
        if request.hyperparams is not None:
            h = request.hyperparams
            hp = Hyperparams(
                learning_rate=h.learning_rate,
                discount=h.discount,
                eps_start=h.eps_start,
                eps_end=h.eps_end,
                eps_decay_fraction=h.eps_decay_fraction,
            )
        try:
            policy, stats = train(spec, steps=request.steps, seed=request.seed, hyperparams=hp)
        except GridTooSmall as exc:
            raise _error(str(exc), "/task") from exc
        return models.TrainResponse(
            stats=models.TrainStatsModel(
                r_start=stats.r_start,
                r_end=stats.r_end,
                zeta=stats.zeta,
                seed=stats.seed,
                steps=stats.steps,
                episodes=len(stats.log),
            ),
            log=[list(row) for row in stats.log],
            policy_b64=base64.b64encode(policy.to_bytes()).decode(),
        )

    @app.post("/eval", response_model=models.OutcomeModel)
    def eval_endpoint(request: models.EvalRequest) -> models.OutcomeModel:
        policy = _decode_policy(request.policy_b64)
        task = request.task if request.task is not None else policy.task
        spec = _task_spec(task)
        if policy.task != task:
            raise _error(
                f"policy was trained for {policy.task!r}, not {task!r}", "/task"
            )
        seed = request.eval_seed if request.eval_seed is not None else EVAL_SEED
        episodes = run_evaluation(policy, eval_env(spec, seed), request.episodes)
        outcome = outcome_from_episodes(episodes)
        succ = [steps for _, steps, ok in episodes if ok]
        return models.OutcomeModel(
            s=outcome.s,
            T_d=outcome.T_d,
            successes=len(succ),
            episodes=len(episodes),
            mean_success_steps=(sum(succ) / len(succ)) if succ else None,
        )

    @app.post("/pipeline", response_model=models.PipelineResponse)
    def pipeline(request: models.PipelineRequest) -> models.PipelineResponse:
        scenario = _load_scenario(request.scenario, request.delta_override)
        spec = _task_spec(request.task)
        policy, stats = train(spec, steps=request.steps, seed=request.seed)
        outcome = evaluate(policy, eval_env(spec))
        lam, t_f = lambda_closed_form(scenario.params, scenario.m0_bar, outcome)
        return models.PipelineResponse(
            task=request.task,
            seed=request.seed,
            steps=stats.steps,
            r_start=stats.r_start,
            r_end=stats.r_end,
            zeta=stats.zeta,
            s=outcome.s,
            T_d=outcome.T_d,
            lambda_closed_form=lam,
            lambda_rounded=round_half_away(lam, scenario.rounding),
            t_f=t_f,
            m0_bar=scenario.m0_bar,
        )

    return app


app = create_app()
