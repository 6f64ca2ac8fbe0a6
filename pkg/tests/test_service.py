import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from ilwsse.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["commands"] == sorted(["simulate", "scattering", "ensemble", "equilibrium",
                                       "verify", "mtp", "compare"])


def test_scattering_response_shape(client):
    r = client.post("/scattering", json={"N": 4, "grid": 8})
    assert r.status_code == 200
    body = r.json()
    assert body["report"]["N"] == 4
    assert body["report"]["reflection_coefficient"] == 0.0
    names = [t["name"] for t in body["tables"]]
    assert names == ["eigenvalues", "weyl"]
    assert len(body["tables"][0]["rows"]) == 4
    assert body["records"]["scattering_data.txt"].startswith("#")


def test_eps_selects_ensemble_size(client):
    # R0(sech^2, delta=0.5) = 4.5675...; eps = 0.1 gives round(14.54) = 15
    r = client.post("/scattering", json={"eps": 0.1, "grid": 4})
    assert r.json()["report"]["N"] == 15


@pytest.mark.parametrize("payload", [
    {"N": 4, "eps": 0.1},
    {"N": 0},
    {"N": 4, "unknown": 1},
    {"N": 4, "profile": "nosuchprofile"},
    {"eps": 100.0},
])
def test_usage_errors(client, payload):
    r = client.post("/scattering", json=payload)
    assert r.status_code == 400
    err = r.json()["error"]
    assert err["exit_code"] == 1
    assert err["type"] == "UsageError"


def test_numeric_failure_maps_to_exit_2(client):
    # a time step far beyond the stability bound of the split-step solver
    r = client.post("/simulate", json={"n_x": 256, "dt": 0.1, "t_end": 0.2, "snapshots": []})
    assert r.status_code == 422
    assert r.json()["error"]["exit_code"] == 2


def test_failed_check_reports_passed_false(client):
    r = client.post("/mtp", json={"nu": ["-5/2"], "grid": 3, "tolerance": 1e-6})
    assert r.status_code == 200
    assert r.json()["passed"] is False


def test_verify_fast_criteria(client):
    r = client.post("/verify", json={"criteria": [1, 2]})
    assert r.status_code == 200
    assert r.json()["passed"] is True


def test_verify_rejects_unknown_criterion(client):
    assert client.post("/verify", json={"criteria": [13]}).status_code == 400
