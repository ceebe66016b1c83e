import zlib

import numpy as np
import pytest

from loopgauge.errors import InvalidStateError, KernelError, ProductStateLink
from loopgauge.services.quantum.correlation import ETA, CorrelationMatrix, boost, corr_matrix, rotation, sl2_to_lorentz
from loopgauge.services.paperlab.catalog import random_ghz_params, spectrum_distance
from loopgauge.services.quantum.states import (
    catalog,
    ghz_class_state,
    marginal,
    pure_state,
    random_local_op,
    random_state,
    w_class_state,
)
from loopgauge.services.twist.holonomy import (
    gauge_transform,
    implied_sigma,
    is_lorentz_spectrum,
    loop_links,
    loop_pairs,
    symmetrized,
    transporter,
    twist,
    twist_from_links,
)

PI_SPECTRUM = np.array([-1.0, -1.0, 1.0, 1.0])


def _sorted_real(values):
    return np.sort(np.asarray(values).real)


def test_loop_pairs_order():
    assert loop_pairs((0, 1, 2)) == [(1, 0), (2, 1), (0, 2)]
    assert loop_pairs((3, 1)) == [(1, 3), (3, 1)]


@pytest.mark.parametrize("method", ["sqrt", "eigen", "iterative"])
def test_transporter_symmetrizes(method, two_qubit_states):
    for rho in two_qubit_states[:5]:
        corr = corr_matrix(rho, (0, 1))
        t = transporter(corr, method=method)
        s_tilde = np.linalg.inv(t.U) @ corr.S
        assert np.allclose(s_tilde, s_tilde.T, atol=1e-8)


def test_sqrt_route_positive_determinant():
    v = boost([0.2, 0.1, -0.4], 0.3) @ rotation([0.3, 0.0, 0.2])
    w = rotation([0.0, -0.6, 0.1]) @ boost([1.0, 0.0, 0.0], 0.5)
    sigma = [0.5, 0.3, 0.2, 0.1]
    corr = CorrelationMatrix(v @ np.diag(sigma) @ w.T)
    t = transporter(corr, method="sqrt")
    assert np.allclose(t.U, v @ ETA @ w.T @ ETA, atol=1e-8)
    assert np.allclose(t.sigma, sigma, atol=1e-8)


def test_right_transporter_and_symmetrized_forms(two_qubit_states):
    corr = corr_matrix(two_qubit_states[0])
    left = transporter(corr, side="left")
    right = transporter(corr, side="right")
    assert np.allclose(right.U, ETA @ left.U @ ETA)
    s_right = symmetrized(corr, side="right").S
    assert np.allclose(s_right @ right.U, corr.S, atol=1e-9)
    s_left = symmetrized(corr, side="left").S
    assert np.allclose(left.U @ s_left, corr.S, atol=1e-9)


def test_implied_sigma_of_werner():
    s_tilde = 0.5 * np.diag([1.0, -1 / 3, -1 / 3, -1 / 3])
    assert np.allclose(implied_sigma(s_tilde), [0.5, -1 / 6, -1 / 6, -1 / 6])


def test_two_qubit_loops_are_untwisted(two_qubit_states):
    for rho in two_qubit_states:
        report = twist(rho, (0, 1))
        assert abs(report.xi - 1.0) < 1e-8
        assert np.allclose(report.holonomy, np.eye(4), atol=1e-7)


def test_pure_three_qubit_states_have_pi_rotation_holonomy():
    states = [
        ghz_class_state(0.6, 1.0, 0.8, 1.2, 0.9),
        ghz_class_state(0.5, 1.3, 0.9, 0.7, 2.0),
        w_class_state(0.0, 0.5, 0.6, 0.7),
        w_class_state(0.3, 0.4, 0.9, 0.6),
    ]
    for rho in states:
        report = twist(rho, (0, 1, 2))
        assert abs(report.xi) < 1e-6
        assert np.allclose(_sorted_real(report.eigenvalues), PI_SPECTRUM, atol=1e-6)
        assert report.lorentz_spectrum


def test_untwisted_mixtures():
    for name in ("singlet_mixture_3q", "ghz_w_mixture_3q"):
        report = twist(catalog(name), (0, 1, 2))
        assert np.isclose(report.xi, 1.0)
        assert np.allclose(report.holonomy, np.eye(4), atol=1e-8)


def test_reversed_loop_and_right_side_agree(three_qubit_states):
    rho = three_qubit_states[0]
    forward = twist(rho, (0, 1, 2))
    backward = twist(rho, (0, 2, 1))
    right = twist(rho, (0, 1, 2), side="right")
    assert np.isclose(forward.xi, forward.xi_reversed)
    assert np.isclose(forward.xi, backward.xi, rtol=1e-8)
    assert np.isclose(forward.xi, right.xi, rtol=1e-8)
    assert np.allclose(right.holonomy, ETA @ forward.holonomy @ ETA, atol=1e-8)


def test_basepoint_independence(three_qubit_states):
    rho = three_qubit_states[1]
    assert np.isclose(twist(rho, (0, 1, 2)).xi, twist(rho, (1, 2, 0)).xi, rtol=1e-8)


def test_gauge_invariance(rng, three_qubit_states):
    for rho in three_qubit_states:
        links = loop_links(rho, (0, 1, 2))
        ops = {q: random_local_op(rng, spread=0.5) for q in range(3)}
        gauged = gauge_transform(links, ops)
        before = twist_from_links(links, (0, 1, 2))
        after = twist_from_links(gauged.links, (0, 1, 2))
        assert np.isclose(before.xi, after.xi, rtol=1e-8, atol=1e-8)
        assert np.allclose(gauged.applied[0], sl2_to_lorentz(ops[0]).U)


def test_gauge_matches_local_filtering(rng):
    rho = catalog("bell_phi_plus")
    a, b = random_local_op(rng), random_local_op(rng)
    from loopgauge.services.quantum.states import apply_local

    moved = apply_local(rho, [a, b], renormalize=False).state
    link = corr_matrix(rho, (0, 1))
    gauged = gauge_transform([link], {0: a, 1: b}).links[0]
    assert np.allclose(gauged.S, corr_matrix(moved).S, atol=1e-9)


def test_cross_check_reports_route_gap(three_qubit_states):
    report = twist(three_qubit_states[2], (0, 1, 2), cross_check=True)
    assert report.route_gap is not None and report.route_gap < 1e-5


def test_cross_check_notes_defective_links():
    report = twist(w_class_state(0.0, 0.5, 0.6, 0.7), (0, 1, 2), cross_check=True)
    assert report.route_gap is None
    assert any("eigen route unavailable" in note for note in report.notes)


def test_invalid_loops_and_links():
    rho = catalog("ghz_w_mixture_3q")
    with pytest.raises(InvalidStateError):
        twist(rho, (0,))
    with pytest.raises(InvalidStateError):
        twist(rho, (0, 1, 1))
    with pytest.raises(InvalidStateError):
        twist(rho, (0, 1, 5))
    with pytest.raises(KernelError):
        transporter(corr_matrix(marginal(rho, (0, 1))), method="polar")

    product = pure_state(np.kron([1.0, 0.0], [0.6, 0.8]))
    with pytest.raises(ProductStateLink):
        transporter(corr_matrix(product, (0, 1)))


def test_lorentz_spectrum_check():
    assert is_lorentz_spectrum(np.array([2.0, 0.5, 1.0, 1.0]))
    assert not is_lorentz_spectrum(np.array([2.0, 0.4, 1.0, 1.0]))


def test_degenerate_non_singlet_links_are_noted():
    from loopgauge.services.quantum.correlation import density_from_corr

    rho = density_from_corr(CorrelationMatrix(np.diag([0.5, 0.1, 0.1, 0.05])))
    report = twist(rho, (0, 1))
    assert report.xi == pytest.approx(1.0)
    assert any("not unique" in note for note in report.notes)

    werner = twist(catalog("werner_third"), (0, 1))
    assert not any("not unique" in note for note in werner.notes)


def test_random_mixed_states_have_generic_holonomies(three_qubit_states):
    reports = [twist(rho, (0, 1, 2)) for rho in three_qubit_states]
    assert all(r.lorentz_spectrum for r in reports)
    assert any(np.max(np.abs(r.eigenvalues.imag)) > 1e-6 for r in reports)
    assert any(abs(r.xi - 1.0) > 1e-6 for r in reports)


def test_sqrt_route_on_a_thousand_seeded_two_qubit_states():
    rng = np.random.default_rng([7, zlib.crc32(b"two_qubit_untwisted")])
    for _ in range(1000):
        rho = random_state(2, rng)
        report = twist(rho, (0, 1))
        assert abs(report.xi - 1.0) < 1e-8
        for t, corr in zip(report.links, loop_links(rho, (0, 1))):
            s_tilde = t.Lambda.inverse().U @ corr.S
            assert np.max(np.abs(s_tilde - s_tilde.T)) <= 1e-8 * np.max(np.abs(s_tilde))


def test_sqrt_route_on_five_hundred_ghz_class_states():
    rng = np.random.default_rng([7, zlib.crc32(b"pure3_pi_rotation")])
    for _ in range(500):
        report = twist(ghz_class_state(**random_ghz_params(rng)), (0, 1, 2))
        assert abs(report.xi) < 1e-6
        assert spectrum_distance(report.eigenvalues, PI_SPECTRUM) < 1e-6


def test_sqrt_route_on_a_badly_conditioned_ghz_state():
    # gamma next to pi/2: badly conditioned links
    rho = ghz_class_state(delta=0.7, alpha=0.38, beta=1.1, gamma=1.5702, phi=2.4)
    for corr in loop_links(rho, (0, 1, 2)):
        t = transporter(corr, method="sqrt")
        symmetric = t.Lambda.inverse().U @ corr.S
        assert np.max(np.abs(symmetric - symmetric.T)) <= 1e-8 * np.max(np.abs(symmetric))
    assert abs(twist(rho, (0, 1, 2)).xi) < 1e-6
