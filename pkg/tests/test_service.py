import base64
import json

import pytest

from circmat.disassembler import TabularPolicy, default_task, train
from circmat.scenario import bundled_scenario_path


@pytest.fixture(scope="module")
def client():
    from starlette.testclient import TestClient

    from circmat.service.app import create_app

    with TestClient(create_app(), raise_server_exceptions=False) as c:
        yield c


def scenario_dict(name="table2_sac"):
    return json.loads(bundled_scenario_path(name).read_text())


class TestHealth:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"


class TestValidateEndpoint:
    def test_valid_scenario(self, client):
        body = client.post("/scenario/validate", json={"scenario": scenario_dict()}).json()
        assert body["valid"]
        assert body["summary"] == {"n_v": 3, "n_a": 3, "n_c": 6, "solids_topology": True}

    def test_invalid_scenario_lists_issues(self, client):
        data = scenario_dict()
        data["materials"][0]["criticality"] = 2.0
        body = client.post("/scenario/validate", json={"scenario": data}).json()
        assert not body["valid"]
        assert any(e["path"] == "/materials/0/criticality" for e in body["errors"])


class TestLambdaEndpoint:
    def test_reference_report(self, client):
        response = client.post("/lambda", json={"scenario": scenario_dict()})
        assert response.status_code == 200
        body = response.json()
        assert body["lambda_rounded"] == -2.1
        assert body["m0_bar"] == pytest.approx(1.05)
        assert body["mu"] == 2
        assert abs(body["lambda_numeric"] - body["lambda_closed_form"]) <= 1e-9 * abs(
            body["lambda_closed_form"]
        )
        assert "lambda_closed_form" in body["text"]

    def test_invalid_scenario_is_400_with_issue_list(self, client):
        data = scenario_dict()
        data["timing"]["T_i"] = -1
        response = client.post("/lambda", json={"scenario": data})
        assert response.status_code == 400
        errors = response.json()["detail"]["errors"]
        assert any(e["path"] == "/timing/T_i" for e in errors)

    def test_delta_override(self, client):
        body = client.post(
            "/lambda", json={"scenario": scenario_dict(), "delta_override": 7.0}
        ).json()
        assert body["delta"] == 7.0

    def test_policy_reference_requires_blob(self, client):
        data = scenario_dict()
        data["outcome"] = {"policy": "x.policy", "task": "two_parts_one_target"}
        response = client.post("/lambda", json={"scenario": data})
        assert response.status_code == 400

    def test_policy_reference_with_blob(self, client):
        policy, _ = train(default_task("two_parts_one_target"), steps=0, seed=0)
        data = scenario_dict()
        data["outcome"] = {"policy": "x.policy", "task": "two_parts_one_target"}
        blob = base64.b64encode(policy.to_bytes()).decode()
        body = client.post("/lambda", json={"scenario": data, "policy_b64": blob}).json()
        # Untrained policy fails every episode: storage fallback and -3.1.
        assert body["s"] == 0.0
        assert body["T_d"] == 86_400.0
        assert body["lambda_rounded"] == -3.1

    def test_task_mismatch_rejected(self, client):
        policy = TabularPolicy(task="two_parts_two_targets", grid=(5, 5))
        data = scenario_dict()
        data["outcome"] = {"policy": "x.policy", "task": "two_parts_one_target"}
        blob = base64.b64encode(policy.to_bytes()).decode()
        response = client.post("/lambda", json={"scenario": data, "policy_b64": blob})
        assert response.status_code == 400


class TestSweepEndpoint:
    def test_success_sweep_is_monotone(self, client):
        body = client.post(
            "/sweep",
            json={"scenario": scenario_dict(), "var": "s", "start": 0, "stop": 100, "steps": 11},
        ).json()
        lams = [r["lambda_exact"] for r in body["rows"]]
        assert len(lams) == 11
        assert all(b > a for a, b in zip(lams, lams[1:]))

    def test_bad_variable_rejected(self, client):
        response = client.post(
            "/sweep",
            json={"scenario": scenario_dict(), "var": "zzz", "start": 0, "stop": 1, "steps": 2},
        )
        assert response.status_code == 400

    def test_single_step_grid_rejected(self, client):
        response = client.post(
            "/sweep",
            json={"scenario": scenario_dict(), "var": "s", "start": 0, "stop": 1, "steps": 1},
        )
        assert response.status_code == 422  # schema-level constraint


class TestReproduceEndpoint:
    def test_all_rows_match(self, client):
        body = client.post("/tables/reproduce", json={}).json()
        assert body["all_match"]
        assert [r["expected"] for r in body["rows"]] == [-2.1, -2.3, -3.1, -6.3, -7.2]
        assert all(r["passed"] for r in body["rows"])


class TestTrainEvalPipeline:
    def test_train_returns_policy_and_log(self, client):
        body = client.post(
            "/train", json={"task": "two_parts_one_target", "steps": 2_000, "seed": 0}
        ).json()
        assert body["stats"]["steps"] == 2_000
        assert body["stats"]["r_start"] == -50.0
        blob = base64.b64decode(body["policy_b64"])
        assert blob.startswith(b"CIROQ1")
        assert body["log"]
        assert body["stats"]["zeta"] == pytest.approx(
            body["stats"]["r_end"] - body["stats"]["r_start"]
        )

    def test_train_determinism_across_requests(self, client):
        a = client.post("/train", json={"task": "two_parts_one_target", "steps": 3_000, "seed": 5}).json()
        b = client.post("/train", json={"task": "two_parts_one_target", "steps": 3_000, "seed": 5}).json()
        assert a == b

    def test_unknown_task_rejected(self, client):
        response = client.post("/train", json={"task": "nope", "steps": 10, "seed": 0})
        assert response.status_code == 400

    def test_eval_roundtrip(self, client):
        trained = client.post(
            "/train", json={"task": "two_parts_one_target", "steps": 2_000, "seed": 0}
        ).json()
        body = client.post(
            "/eval", json={"policy_b64": trained["policy_b64"], "episodes": 20}
        ).json()
        assert body["episodes"] == 20
        assert 0.0 <= body["s"] <= 100.0

    def test_eval_rejects_garbage_policy(self, client):
        blob = base64.b64encode(b"garbage").decode()
        response = client.post("/eval", json={"policy_b64": blob})
        assert response.status_code == 400

    def test_pipeline_zero_steps_reference_value(self, client):
        body = client.post(
            "/pipeline",
            json={
                "task": "two_parts_one_target",
                "steps": 0,
                "seed": 0,
                "scenario": scenario_dict(),
            },
        ).json()
        assert body["s"] == 0.0
        assert body["T_d"] == 86_400.0
        assert body["lambda_rounded"] == -3.1
        assert body["zeta"] == 0.0
