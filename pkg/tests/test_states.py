import json

import numpy as np
import pytest

from loopgauge.errors import InvalidStateError
from loopgauge.services.quantum.states import (
    CATALOG_NAMES,
    DensityMatrix,
    LocalOp,
    apply_local,
    catalog,
    embed_pair,
    ghz_class_state,
    ket,
    load_state,
    marginal,
    mix,
    permute_qubits,
    pure_state,
    rank3_family,
    rank4_family,
    state_from_payload,
    state_to_payload,
    w_class_state,
)


def test_density_matrix_validation():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([0.5, 0.6, 0.0, 0.0]))  # trace
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([1.5, -0.5, 0.0, 0.0]))  # negative eigenvalue
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]))  # not Hermitian
    assert DensityMatrix(np.eye(4) / 4).n_qubits == 2


def test_unimodular_check():
    with pytest.raises(InvalidStateError):
        LocalOp(np.diag([2.0, 1.0]))
    op = LocalOp.unimodular_from(np.diag([4.0, 1.0]))
    assert np.isclose(np.linalg.det(op.matrix), 1.0)


def test_catalog_builds_every_entry():
    params = {
        "rank3_family": {"p": 0.3, "x": 0.4, "y": 0.5, "z": 0.6, "w": 0.2},
        "rank4_family": {"p": 0.25, "x": 3.0, "y": 2.0, "z": 1.0},
    }
    for name in CATALOG_NAMES:
        rho = catalog(name, params.get(name))
        assert np.isclose(rho.trace, 1.0)
    with pytest.raises(InvalidStateError):
        catalog("nope")
    with pytest.raises(InvalidStateError):
        catalog("rank3_family", {"p": 0.3, "x": 1.0})


def test_singlet_mixture_marginals_are_werner():
    rho = catalog("singlet_mixture_3q")
    werner = catalog("werner_third")
    for pair in ((0, 1), (1, 2), (2, 0)):
        assert np.allclose(marginal(rho, pair).matrix, werner.matrix)


def test_embed_and_permute():
    singlet = catalog("bell_psi_minus")
    placed = embed_pair(singlet, (2, 0), 3)
    assert np.allclose(marginal(placed, (2, 0)).matrix, singlet.matrix)
    assert np.allclose(marginal(placed, (0, 1)).matrix, np.eye(4) / 4)
    swapped = permute_qubits(placed, [2, 1, 0])
    assert np.allclose(marginal(swapped, (0, 2)).matrix, singlet.matrix)


def test_families_are_the_documented_mixtures():
    rho = rank3_family(0.3, 0.4, 0.5, 0.6, 0.2)
    ghz = pure_state(ket({"000": 1, "111": 1}))
    psi = pure_state(ket({"001": 0.4, "010": 0.5, "100": 0.6, "111": 0.2}))
    assert np.allclose(rho.matrix, 0.3 * ghz.matrix + 0.7 * psi.matrix)

    w4 = rank4_family(0.5, 1.0, 1.0, 1.0)
    assert np.isclose(w4.matrix[int("001", 2), int("001", 2)].real, 0.5 / 3)
    assert np.isclose(w4.matrix[int("110", 2), int("110", 2)].real, 0.5 / 3)


def test_ghz_class_out_of_range_warns():
    with pytest.warns(UserWarning):
        ghz_class_state(1.2, 0.5, 0.5, 0.5, 1.0)


def test_w_class_requires_positive_amplitudes():
    with pytest.raises(InvalidStateError):
        w_class_state(0.0, 0.0, 1.0, 1.0)


def test_apply_local_weight_and_annihilation():
    rho = catalog("bell_phi_plus")
    projector = LocalOp(np.diag([1.0, 0.0]), unimodular=False)
    outcome = apply_local(rho, [projector, None])
    assert np.isclose(outcome.weight, 0.5)
    assert np.allclose(outcome.state.matrix, np.diag([1.0, 0.0, 0.0, 0.0]))

    product = pure_state(ket({"11": 1}))
    with pytest.raises(InvalidStateError):
        apply_local(product, [projector, None])


def test_mix_rejects_bad_weights():
    rho = catalog("bell_phi_plus")
    with pytest.raises(InvalidStateError):
        mix([(0.7, rho), (0.7, rho)])


def test_state_file_round_trip(tmp_path):
    rho = catalog("ghz_w_mixture_3q")
    path = tmp_path / "state.json"
    path.write_text(json.dumps(state_to_payload(rho)))
    back = load_state(str(path))
    assert back.n_qubits == 3
    assert np.allclose(back.matrix, rho.matrix)

    from_catalog = state_from_payload({"catalog": "rank4_family", "params": {"p": 0.25, "x": 3, "y": 2, "z": 1}})
    assert from_catalog.n_qubits == 3
    with pytest.raises(InvalidStateError):
        state_from_payload({"matrix": "nonsense"})
