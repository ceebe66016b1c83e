import numpy as np

from loopgauge.services.quantum.states import pure_state, state_to_payload


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_catalog_listing(client):
    r = client.get("/states/catalog")
    assert "werner_third" in r.json()["names"]


def test_corr_of_catalog_state(client):
    r = client.post("/states/corr", json={"state": {"catalog": "bell_psi_minus"}})
    assert r.status_code == 200
    body = r.json()
    assert abs(body["S"][3][3] + 0.5) < 1e-12
    assert body["rank"] == 4


def test_corr_rejects_unphysical_matrix(client):
    bad = np.diag([0.75, 0.5, -0.25, 0.0])
    payload = {"matrix": [[[float(v), 0.0] for v in row] for row in bad]}
    r = client.post("/states/corr", json={"state": payload})
    assert r.status_code == 422
    assert r.json()["detail"]["error"] == "InvalidStateError"


def test_state_needs_exactly_one_source(client):
    r = client.post("/states/corr", json={"state": {}})
    assert r.status_code == 422


def test_loop_twist(client):
    r = client.post("/twist/loop", json={"state": {"catalog": "singlet_mixture_3q"}, "loop": [0, 1, 2]})
    assert r.status_code == 200
    body = r.json()
    assert abs(body["xi"] - 1.0) < 1e-8
    assert [link["pair"] for link in body["links"]] == [[1, 0], [2, 1], [0, 2]]
    assert all(set(link) == {"pair", "lambda", "sigma"} for link in body["links"])


def test_product_link_is_a_conflict(client):
    product = state_to_payload(pure_state([1, 0, 0, 0]))
    r = client.post("/twist/transporter", json={"state": product})
    assert r.status_code == 409
    assert r.json()["detail"]["link"] == [0, 1]


def test_lsvd_defaults_to_eigen_route(client):
    r = client.post("/twist/lsvd", json={"state": {"catalog": "werner_third"}})
    assert r.status_code == 200
    assert r.json()["method"] == "eigen"


def test_protocol_endpoint(client):
    r = client.post("/twist/protocol", json={"state": {"catalog": "singlet_mixture_3q"}, "loop": [0, 1, 2]})
    assert r.status_code == 200
    assert len(r.json()["steps"]) == 3


def test_verify_lists_claims(client):
    ids = [c["claim_id"] for c in client.get("/verify/claims").json()]
    assert "homomorphism" in ids


def test_verify_archives_and_reads_back(client):
    r = client.post("/verify?archive=true", json={"claims": ["werner_concurrence_zero"], "samples": 1})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    run_id = body["run_id"]

    r = client.get(f"/verify/runs/{run_id}")
    assert r.status_code == 200
    run = r.json()
    assert run["seed"] == 7
    assert run["selection"] == ["werner_concurrence_zero"]
    assert [c["claim_id"] for c in run["claims"]] == ["werner_concurrence_zero"]


def test_verify_unknown_claim(client):
    r = client.post("/verify", json={"claims": ["nope"]})
    assert r.status_code == 400


def test_missing_run(client):
    assert client.get("/verify/runs/999").status_code == 404


def test_transporter_reports_lambda(client):
    r = client.post("/twist/transporter", json={"state": {"catalog": "werner_third"}})
    assert r.status_code == 200
    body = r.json()
    assert set(body) == {"pair", "lambda", "sigma", "method", "side"}
    assert np.allclose(body["lambda"], np.eye(4), atol=1e-9)
