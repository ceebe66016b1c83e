import json

import pytest

from loopgauge.cli import EXIT_CLAIM_FAILED, EXIT_OK, EXIT_USAGE, main


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_state_build_and_twist_from_file(tmp_path, capsys):
    path = tmp_path / "werner.json"
    assert main(["state", "build", "--catalog", "werner_third", "--out", str(path)]) == EXIT_OK
    assert json.loads(path.read_text())["n_qubits"] == 2

    assert main(["twist", "--state", str(path), "--loop", "0,1"]) == EXIT_OK
    report = _json(capsys)
    assert report["loop"] == [0, 1]
    assert report["xi"] == pytest.approx(1.0)
    assert len(report["links"]) == 2
    assert all(set(link) == {"pair", "lambda", "sigma"} for link in report["links"])


def test_corr_reports_link(capsys):
    assert main(["corr", "--catalog", "bell_psi_minus"]) == EXIT_OK
    report = _json(capsys)
    assert report["pair"] == [0, 1]
    assert report["S"][1][1] == pytest.approx(-0.5)
    assert report["det_sign"] == -1


def test_lsvd_table_output(capsys):
    assert main(["lsvd", "--catalog", "werner_third", "--format", "table"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("pair")
    assert "concurrence" in out


def test_twist_three_qubit_catalog_with_cross_check(capsys):
    code = main(["twist", "--catalog", "rank4_family", "--params", "p=0.25,x=3,y=2,z=1", "--loop", "0,1,2", "--cross-check"])
    assert code == EXIT_OK
    report = _json(capsys)
    assert report["route_gap"] is not None or report["notes"]
    assert report["xi"] == pytest.approx(report["xi_reversed"], rel=1e-7)


def test_protocol_command(capsys):
    assert main(["protocol", "--catalog", "singlet_mixture_3q", "--loop", "0,1,2"]) == EXIT_OK
    report = _json(capsys)
    assert [s["qubit"] for s in report["steps"]] == [1, 2, 0]
    assert report["mismatch_gap"] < 1e-6


def test_invalid_state_exits_with_usage_code(capsys):
    code = main(["twist", "--catalog", "rank3_family", "--params", "p=2,x=1,y=1,z=1,w=1", "--loop", "0,1,2"])
    assert code == EXIT_USAGE
    assert _json(capsys)["error"] == "InvalidStateError"


def test_bad_arguments_are_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["twist", "--catalog", "werner_third", "--loop", "0,x"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--claims", "no_such_claim"])
    assert exc.value.code == 2


def test_verify_selected_claims(capsys):
    code = main(["verify", "--claims", "werner_concurrence_zero,homomorphism", "--samples", "2"])
    assert code == EXIT_OK
    results = _json(capsys)
    assert [r["claim_id"] for r in results] == ["werner_concurrence_zero", "homomorphism"]
    assert all(r["passed"] for r in results)
    assert "runtime_ms" not in results[0]


def test_verify_reports_failures_through_exit_code(monkeypatch, capsys):
    from loopgauge.services.paperlab import catalog as claim_catalog

    def broken(ctx):
        raise RuntimeError("boom")

    claim = claim_catalog.CLAIMS["werner_concurrence_zero"]
    monkeypatch.setitem(claim_catalog.CLAIMS, "werner_concurrence_zero", claim.__class__(claim.claim_id, claim.statement, claim.provenance, claim.tolerance, broken))
    assert main(["verify", "--claims", "werner_concurrence_zero"]) == EXIT_CLAIM_FAILED
    result = _json(capsys)[0]
    assert result["passed"] is False
    assert result["computed"] is None


def test_sweep_grid(capsys):
    args = ["sweep", "--family", "rank4", "--grid", "p=0.25", "--grid", "x=3", "--grid", "y=2", "--grid", "z=1"]
    assert main(args) == EXIT_OK
    report = _json(capsys)
    assert len(report["points"]) == 1
    assert report["points"][0]["gap"] < 1e-6


RANK4 = ["--catalog", "rank4_family", "--params", "p=0.25,x=3,y=2,z=1", "--pair", "1,0"]


def test_tolerance_sets_the_method_tolerance(capsys):
    assert main(["transporter", *RANK4, "--method", "iterative", "--tolerance", "1e-6"]) == EXIT_OK
    report = _json(capsys)
    assert report["method"] == "iterative"
    assert len(report["lambda"]) == 4

    assert main(["transporter", *RANK4, "--method", "iterative", "--tolerance", "0"]) == 3
    assert _json(capsys)["error"] == "ConvergenceError"


def test_rank_tolerance_is_its_own_flag(capsys):
    assert main(["lsvd", "--catalog", "werner_third", "--rank-tolerance", "0.5"]) == 3
    assert _json(capsys)["error"] == "ProductStateLink"
    assert main(["lsvd", "--catalog", "werner_third", "--tolerance", "0.5"]) == EXIT_OK
