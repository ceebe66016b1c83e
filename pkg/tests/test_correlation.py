import numpy as np
import pytest

from loopgauge.errors import GroupElementError, InvalidStateError
from loopgauge.services.quantum.correlation import (
    BELL_CORRELATIONS,
    ETA,
    CorrelationMatrix,
    LorentzMatrix,
    boost,
    concurrence_from_sigma,
    concurrence_wootters,
    corr_matrix,
    density_from_corr,
    is_lorentz,
    lorentz_project,
    lorentz_to_sl2,
    pi_rotation,
    rotation,
    sl2_to_lorentz,
    wootters_lambdas,
)
from loopgauge.services.quantum.states import (
    LocalOp,
    apply_local,
    catalog,
    marginal,
    pure_state,
    rank3_family,
    rank4_family,
)
from loopgauge.services.twist.holonomy import loop_links, transporter


@pytest.mark.parametrize("name", sorted(BELL_CORRELATIONS))
def test_bell_state_correlations(name):
    assert np.allclose(corr_matrix(catalog(name)).S, BELL_CORRELATIONS[name])


def test_correlation_matrix_inverts(two_qubit_states):
    for rho in two_qubit_states:
        corr = corr_matrix(rho)
        assert np.isclose(corr.s00, 0.5)
        assert np.allclose(density_from_corr(corr).matrix, rho.matrix)


def test_swapped_transposes(two_qubit_states):
    from loopgauge.services.quantum.states import marginal

    rho = two_qubit_states[0]
    assert np.allclose(corr_matrix(marginal(rho, (1, 0))).S, corr_matrix(rho).S.T)
    assert corr_matrix(rho, (0, 1)).swapped().pair == (1, 0)


def test_corr_needs_two_qubits():
    with pytest.raises(InvalidStateError):
        corr_matrix(catalog("singlet_mixture_3q"))


def test_images_are_lorentz(local_ops):
    for op in local_ops:
        u = sl2_to_lorentz(op).U
        assert is_lorentz(u).in_so_plus
        assert np.allclose(ETA @ u.T @ ETA @ u, np.eye(4), atol=1e-10 * np.max(np.abs(u)) ** 2)


def test_homomorphism(local_ops):
    for a, b in zip(local_ops[::2], local_ops[1::2]):
        product = sl2_to_lorentz(LocalOp(a.matrix @ b.matrix)).U
        assert np.allclose(product, sl2_to_lorentz(a).U @ sl2_to_lorentz(b).U, atol=1e-9)


def test_preimage_up_to_sign(local_ops):
    for op in local_ops:
        back = lorentz_to_sl2(sl2_to_lorentz(op)).matrix
        assert np.allclose(back, op.matrix, atol=1e-8) or np.allclose(back, -op.matrix, atol=1e-8)


def test_covariance(two_qubit_states, local_ops):
    for rho, a, b in zip(two_qubit_states, local_ops, local_ops[1:]):
        moved = apply_local(rho, [a, b], renormalize=False).state
        expected = sl2_to_lorentz(a).U @ corr_matrix(rho).S @ sl2_to_lorentz(b).U.T
        assert np.allclose(corr_matrix(moved).S, expected, atol=1e-9)


def test_known_images():
    # diag(e^{t/2}, e^{-t/2}) is a boost along z with rapidity t
    t = 0.7
    op = LocalOp(np.diag([np.exp(t / 2), np.exp(-t / 2)]))
    assert np.allclose(sl2_to_lorentz(op).U, boost([0, 0, 1], t))
    # i sigma_z is a pi rotation about z
    assert np.allclose(sl2_to_lorentz(LocalOp(np.diag([1j, -1j]))).U, pi_rotation(3))


def test_lorentz_matrix_rejects_non_members():
    with pytest.raises(GroupElementError):
        LorentzMatrix(np.diag([-1.0, -1.0, 1.0, 1.0]))  # not orthochronous
    with pytest.raises(GroupElementError):
        LorentzMatrix(np.diag([1.0, -1.0, 1.0, 1.0]))  # not proper
    with pytest.raises(GroupElementError):
        LorentzMatrix(2.0 * np.eye(4))
    u = LorentzMatrix(boost([1, 0, 0], 0.3) @ rotation([0.2, 0.1, -0.4]))
    assert np.allclose((u @ u.inverse()).U, np.eye(4))


def test_wootters_and_sigma_concurrence():
    assert np.isclose(concurrence_wootters(catalog("bell_psi_minus")), 1.0)
    assert concurrence_wootters(catalog("werner_third")) < 1e-12
    assert np.isclose(concurrence_from_sigma([0.5, -0.5, -0.5, -0.5]), 1.0)
    assert concurrence_from_sigma([0.5, 1 / 6, 1 / 6, 1 / 6]) == 0.0

    alpha, beta = 0.6, 0.8
    rho = pure_state([alpha, 0, 0, beta])
    assert np.isclose(concurrence_wootters(rho), 2 * alpha * beta)


def test_transformed_is_gauge_action():
    corr = CorrelationMatrix(BELL_CORRELATIONS["bell_psi_minus"], (1, 0))
    r = rotation([0.0, 0.0, 0.4])
    # the singlet is invariant under equal rotations on both qubits
    assert np.allclose(corr.transformed(r, r).S, corr.S)


def test_wootters_lambdas_vanish_to_round_off_on_pure_states():
    lam = wootters_lambdas(pure_state([0.6, 0, 0, 0.8]))
    assert np.isclose(lam[0], 0.96)
    assert np.all(np.abs(lam[1:]) < 1e-14)


@pytest.mark.parametrize(
    "rho",
    [
        rank3_family(0.3, 0.2, 0.3, 0.9, 1.0),
        rank3_family(0.1, 0.7, 0.5, 0.6, 0.2),
        rank4_family(0.25, 3.0, 2.0, 1.0),
        rank4_family(0.4, 0.5, 1.5, 1.0),
    ],
)
def test_concurrence_routes_agree_on_family_marginals(rho):
    for corr in loop_links(rho, (0, 1, 2)):
        c_wootters = concurrence_wootters(marginal(rho, corr.pair))
        c_sigma = concurrence_from_sigma(transporter(corr).sigma)
        assert abs(c_wootters - c_sigma) < 1e-9


def test_projection_restores_group_membership(rng):
    u = boost([0.3, -0.2, 0.9], 1.4) @ rotation([0.1, 0.5, -0.3])
    noisy = u + 1e-9 * rng.normal(size=(4, 4))
    assert not is_lorentz(noisy).in_so_plus
    fixed = lorentz_project(noisy)
    assert is_lorentz(fixed).in_so_plus
    assert np.allclose(fixed, u, atol=1e-7)
    assert np.array_equal(lorentz_project(3.0 * np.eye(4)), 3.0 * np.eye(4))
