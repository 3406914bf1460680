"""Command-line client for the circularity service.

The CLI is a thin client: every command builds a request, sends it to the
service and formats the response. By default the service app runs in-process
(no server needed); pass ``--server URL`` to target a running instance.

Exit codes: 0 success, 1 reference-table mismatch, 2 input or request error.
"""

from __future__ import annotations

import argparse
import base64
import json
import sys
from pathlib import Path

import httpx

from .scenario import TASK_NAMES

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2


class ClientError(Exception):
    """Request failed; message already formatted for the user."""


class ServiceClient:
    """HTTP client bound either to the in-process app or to a remote URL."""

    def __init__(self, server: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient

            from .service.app import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise ClientError(f"request to {path} failed: {exc}") from exc
        if response.status_code == 200:
            return response.json()
        raise ClientError(_format_error(path, response))

    def close(self) -> None:
        self._client.close()


def _format_error(path: str, response) -> str:
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = None
    if isinstance(detail, dict) and "errors" in detail:
        lines = [f"{path} rejected:"]
        for err in detail["errors"]:
            lines.append(f"  {err.get('path', '/')}: {err.get('message', '')}")
        return "\n".join(lines)
    if isinstance(detail, list):  # request-schema validation
        lines = [f"{path} rejected:"]
        for err in detail:
            loc = "/".join(str(p) for p in err.get("loc", []))
            lines.append(f"  {loc}: {err.get('msg', '')}")
        return "\n".join(lines)
    return f"{path} failed with status {response.status_code}"


def _load_scenario_json(path: str | None) -> dict:
    if not path:
        raise ClientError("a scenario file is required; pass --scenario PATH")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ClientError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ClientError(f"{path} is not valid JSON: {exc}") from exc
    return data


def _policy_b64_for_scenario(scenario_path: str, data: dict) -> str | None:
    """Inline the policy artifact referenced by a scenario, if any; relative
    paths resolve against the scenario file's directory."""
    outcome = data.get("outcome")
    if not isinstance(outcome, dict) or "policy" not in outcome:
        return None
    ref = Path(outcome["policy"])
    if not ref.is_absolute():
        ref = Path(scenario_path).parent / ref
    try:
        return base64.b64encode(ref.read_bytes()).decode()
    except OSError as exc:
        raise ClientError(f"cannot read policy artifact {ref}: {exc}") from exc


def _read_policy_b64(path: str) -> str:
    try:
        return base64.b64encode(Path(path).read_bytes()).decode()
    except OSError as exc:
        raise ClientError(f"cannot read policy {path}: {exc}") from exc


def _write_file(path: str, content: str) -> None:
    try:
        Path(path).write_text(content)
    except OSError as exc:
        raise ClientError(f"cannot write {path}: {exc}") from exc


def _display(value: float, rounded: float) -> str:
    return f"{value:.10f}  (display {rounded:.1f})"


# -- commands -------------------------------------------------------------


def cmd_validate(client: ServiceClient, args) -> int:
    data = _load_scenario_json(args.scenario)
    result = client.post("/scenario/validate", {"scenario": data})
    if result["valid"]:
        s = result["summary"]
        topo = "yes" if s["solids_topology"] else "no"
        print(f"scenario valid: n_v={s['n_v']} n_a={s['n_a']} n_c={s['n_c']} solids_topology={topo}")
        return EXIT_OK
    print("scenario invalid:")
    for err in result["errors"]:
        print(f"  {err['path']}: {err['message']}")
    return EXIT_INPUT


def cmd_lambda(client: ServiceClient, args) -> int:
    data = _load_scenario_json(args.scenario)
    payload: dict = {"scenario": data}
    policy_b64 = _policy_b64_for_scenario(args.scenario, data)
    if policy_b64 is not None:
        payload["policy_b64"] = policy_b64
        payload["eval_seed"] = args.seed if args.seed is not None else None
    if args.delta is not None:
        payload["delta_override"] = args.delta
    result = client.post("/lambda", payload)
    sys.stdout.write(result["text"])
    if args.csv:
        _write_file(args.csv, result["csv"])
    return EXIT_OK


def cmd_sweep(client: ServiceClient, args) -> int:
    data = _load_scenario_json(args.scenario)
    payload = {
        "scenario": data,
        "var": args.var,
        "start": args.start,
        "stop": args.stop,
        "steps": args.steps,
    }
    if args.delta is not None:
        payload["delta_override"] = args.delta
    result = client.post("/sweep", payload)
    lines = ["var,value,lambda_exact,lambda_approx,alpha"]
    for row in result["rows"]:
        lines.append(
            f"{row['var']},{row['value']!r},{row['lambda_exact']!r},"
            f"{row['lambda_approx']!r},{row['alpha']!r}"
        )
    csv = "\n".join(lines) + "\n"
    sys.stdout.write(csv)
    if args.csv:
        _write_file(args.csv, csv)
    return EXIT_OK


def cmd_reproduce_tables(client: ServiceClient, args) -> int:
    result = client.post("/tables/reproduce", {})
    header = f"{'scenario':<12} {'m0_bar':>7} {'s':>6} {'T_d':>9} {'expected':>9} {'computed':>9}  status"
    print(header)
    for row in result["rows"]:
        status = "PASS" if row["passed"] else "FAIL"
        print(
            f"{row['scenario']:<12} {row['m0_bar']:>7.2f} {row['s']:>6.1f} "
            f"{row['T_d']:>9.1f} {row['expected']:>9.1f} {row['computed']:>9.1f}  {status}"
        )
    total = len(result["rows"])
    matched = sum(1 for r in result["rows"] if r["passed"])
    print(f"{matched}/{total} rows match")
    return EXIT_OK if result["all_match"] else EXIT_MISMATCH


def cmd_train(client: ServiceClient, args) -> int:
    payload = {"task": args.task, "seed": args.seed if args.seed is not None else 0}
    if args.steps is not None:
        payload["steps"] = args.steps
    result = client.post("/train", payload)
    stats = result["stats"]
    out_path = args.out or f"{args.task}.policy"
    try:
        Path(out_path).write_bytes(base64.b64decode(result["policy_b64"]))
    except OSError as exc:
        raise ClientError(f"cannot write policy {out_path}: {exc}") from exc
    if args.csv:
        lines = ["step,episode,episode_length,return"]
        for step, episode, length, ret in result["log"]:
            lines.append(f"{int(step)},{int(episode)},{int(length)},{ret!r}")
        _write_file(args.csv, "\n".join(lines) + "\n")
    print(f"task                {args.task}")
    print(f"seed                {stats['seed']}")
    print(f"steps               {stats['steps']}")
    print(f"episodes            {stats['episodes']}")
    print(f"r_start             {stats['r_start']:.6f}")
    print(f"r_end               {stats['r_end']:.6f}")
    print(f"zeta                {stats['zeta']:.6f}")
    print(f"policy              {out_path}")
    return EXIT_OK


def cmd_eval(client: ServiceClient, args) -> int:
    payload: dict = {"policy_b64": _read_policy_b64(args.policy), "episodes": args.episodes}
    if args.task:
        payload["task"] = args.task
    if args.seed is not None:
        payload["eval_seed"] = args.seed
    result = client.post("/eval", payload)
    mean_steps = result["mean_success_steps"]
    print(
        f"s={result['s']:.6f} % T_d={result['T_d']:.6f} s "
        f"successes={result['successes']}/{result['episodes']} "
        f"mean_success_steps={'-' if mean_steps is None else format(mean_steps, '.6f')}"
    )
    return EXIT_OK


def cmd_pipeline(client: ServiceClient, args) -> int:
    data = _load_scenario_json(args.scenario)
    payload = {
        "task": args.task,
        "seed": args.seed if args.seed is not None else 0,
        "scenario": data,
    }
    if args.steps is not None:
        payload["steps"] = args.steps
    if args.delta is not None:
        payload["delta_override"] = args.delta
    result = client.post("/pipeline", payload)
    print(f"task                {result['task']}")
    print(f"seed                {result['seed']}")
    print(f"steps               {result['steps']}")
    print(f"r_start             {result['r_start']:.6f}")
    print(f"r_end               {result['r_end']:.6f}")
    print(f"zeta                {result['zeta']:.6f}")
    print(f"s                   {result['s']:.6f} %")
    print(f"T_d                 {result['T_d']:.6f} s")
    print(f"lambda              {_display(result['lambda_closed_form'], result['lambda_rounded'])}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("circmat.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # Global flags live on a parent so they are accepted both before and
    # after the subcommand; SUPPRESS keeps subcommand parsing from clobbering
    # values given at the top level.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--server", default=argparse.SUPPRESS, help="service URL (default: run the app in-process)"
    )
    common.add_argument("--scenario", default=argparse.SUPPRESS, help="path to a scenario JSON file")
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="seed for training/evaluation"
    )
    common.add_argument(
        "--csv", default=argparse.SUPPRESS, help="also write the command's CSV output to this path"
    )
    common.add_argument(
        "--delta",
        type=float,
        default=argparse.SUPPRESS,
        help="override the flow-to-mass interval (s)",
    )

    parser = argparse.ArgumentParser(
        prog="circmat",
        description="Circularity of batch material networks with a learned disassembly surrogate.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="validate a scenario file")
    sub.add_parser("lambda", parents=[common], help="compute the circularity report for a scenario")

    p_sweep = sub.add_parser("sweep", parents=[common], help="sweep one variable and emit CSV")
    p_sweep.add_argument("--var", required=True, choices=("s", "T_d", "m0"))
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)

    p_train = sub.add_parser("train", parents=[common], help="train a policy on a task")
    p_train.add_argument("--task", required=True, choices=TASK_NAMES)
    p_train.add_argument("--steps", type=int, help="step budget (default: per-task)")
    p_train.add_argument("--out", help="policy output path (default: <task>.policy)")

    p_eval = sub.add_parser("eval", parents=[common], help="evaluate a stored policy")
    p_eval.add_argument("--policy", required=True, help="policy file path")
    p_eval.add_argument("--task", choices=TASK_NAMES, help="expected task (default: from policy)")
    p_eval.add_argument("--episodes", type=int, default=100)

    p_pipe = sub.add_parser(
        "pipeline", parents=[common], help="train, evaluate and report circularity"
    )
    p_pipe.add_argument("--task", required=True, choices=TASK_NAMES)
    p_pipe.add_argument("--steps", type=int, help="step budget (default: per-task)")

    sub.add_parser(
        "reproduce-tables", parents=[common], help="recompute the reference operating points"
    )

    p_serve = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("server", "scenario", "seed", "csv", "delta"):
        if not hasattr(args, name):
            setattr(args, name, None)

    if args.command == "serve":
        return cmd_serve(args)

    commands = {
        "validate": cmd_validate,
        "lambda": cmd_lambda,
        "sweep": cmd_sweep,
        "train": cmd_train,
        "eval": cmd_eval,
        "pipeline": cmd_pipeline,
        "reproduce-tables": cmd_reproduce_tables,
    }
    client = ServiceClient(args.server)
    try:
        return commands[args.command](client, args)
    except ClientError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    finally:
        client.close()


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
