import numpy as np
import pytest

from loopgauge.errors import DefectiveLink, KernelError, ProductStateLink, RankDeficientLink
from loopgauge.services.quantum.correlation import ETA, CorrelationMatrix, boost, corr_matrix, rotation
from loopgauge.services.quantum.states import catalog, marginal, rank3_family, w_class_state
from loopgauge.services.twist.lsvd import (
    canonicalize,
    classify_link,
    lorentz_svd,
    lorentz_svd_eigen,
    lorentz_svd_iterative,
    rank3_region,
)


def _link(v, sigma, w):
    return CorrelationMatrix(v @ np.diag(sigma) @ w.T, (1, 0))


V = boost([0.3, -0.2, 0.5], 0.4) @ rotation([0.1, 0.7, -0.3])
W = rotation([-0.5, 0.2, 0.4]) @ boost([0.0, 1.0, 0.2], -0.25)


@pytest.mark.parametrize("sigma", [[0.5, -0.3, -0.2, -0.1], [0.5, 0.3, 0.2, 0.1]])
@pytest.mark.parametrize("route", [lorentz_svd_eigen, lorentz_svd_iterative])
def test_recovers_planted_decomposition(route, sigma):
    corr = _link(V, sigma, W)
    svd = route(corr)
    assert np.allclose(svd.sigma, sigma, atol=1e-7)
    assert np.allclose(svd.transporter, V @ ETA @ W.T @ ETA, atol=1e-6)
    assert np.allclose(svd.reconstruct(), corr.S, atol=1e-9)
    assert svd.residual < 1e-8


def test_werner_link_is_already_symmetric():
    svd = lorentz_svd_eigen(corr_matrix(catalog("werner_third")))
    assert np.allclose(svd.sigma, [0.5, -1 / 6, -1 / 6, -1 / 6])
    assert np.allclose(svd.transporter, np.eye(4), atol=1e-9)


def test_random_links_agree_across_routes(two_qubit_states):
    for rho in two_qubit_states[:10]:
        corr = corr_matrix(rho)
        eigen = lorentz_svd(corr, method="eigen")
        iterative = lorentz_svd(corr, method="iterative")
        assert np.allclose(eigen.sigma, iterative.sigma, atol=1e-6)
        assert np.allclose(eigen.transporter, iterative.transporter, atol=1e-5)
        assert eigen.sigma[0] > 0
        spatial = eigen.sigma[1:]
        assert np.all(np.diff(np.abs(spatial)) <= 1e-12)
        assert len(set(np.sign(spatial))) == 1
        assert np.sign(spatial[0]) == np.sign(corr.det)


def test_canonicalize_fixes_time_reversal_and_signs():
    sigma = np.array([0.5, -0.3, -0.2, -0.1])
    raw = canonicalize(-V, -sigma, W)
    assert np.allclose(raw.sigma, sigma)
    assert any(c["kind"] == "time_reversal" for c in raw.corrections)

    flipped = np.array([0.5, 0.3, -0.2, 0.1])  # two wrong signs relative to det
    d = np.diag([1.0, -1.0, 1.0, -1.0])
    fixed = canonicalize(V, flipped, W @ d)
    assert np.allclose(fixed.sigma, [0.5, -0.3, -0.2, -0.1])
    assert fixed.residual < 1e-12


def test_canonicalize_sorts_and_is_idempotent():
    order = [0, 3, 1, 2]
    p = np.eye(4)[:, order]
    sigma = np.array([0.5, -0.3, -0.2, -0.1])
    shuffled = canonicalize(V @ p, sigma[order], W @ p)
    assert np.allclose(shuffled.sigma, sigma)
    assert np.allclose(shuffled.transporter, V @ ETA @ W.T @ ETA)

    again = canonicalize(shuffled.V.U, shuffled.sigma, shuffled.W.U)
    assert again.corrections == []


def test_canonicalize_rejects_impossible_signature():
    with pytest.raises(KernelError):
        canonicalize(np.eye(4), [0.0, 0.3, 0.2, 0.1], np.eye(4))


def test_rank_failures():
    with pytest.raises(RankDeficientLink):
        lorentz_svd_eigen(CorrelationMatrix(np.diag([0.5, 0.5, 0.0, 0.0]), (1, 0)))
    a = np.array([1.0, 0.2, 0.0, 0.3])
    b = np.array([1.0, 0.0, -0.4, 0.1])
    with pytest.raises(ProductStateLink) as excinfo:
        lorentz_svd_iterative(CorrelationMatrix(0.5 * np.outer(a, b), (2, 1)))
    assert excinfo.value.link == (2, 1)


def test_w_class_link_is_defective_for_eigen_route():
    rho = w_class_state(0.0, 0.5, 0.6, 0.7)
    corr = corr_matrix(marginal(rho, (1, 0)), (1, 0))
    with pytest.raises(DefectiveLink) as excinfo:
        lorentz_svd_eigen(corr)
    assert excinfo.value.link == (1, 0)


def test_unknown_method():
    with pytest.raises(KernelError):
        lorentz_svd(corr_matrix(catalog("werner_third")), method="qr")


def test_rank3_regions_and_classification():
    # normalized amplitudes with p = 0.3
    assert rank3_region(0.3, 0.8, 0.5, 0.1) == "I"
    assert rank3_region(0.3, 0.0, 0.5, 0.05) == "II"
    assert rank3_region(0.0, 0.0, 0.5, 0.45) == "III"

    params = {"p": 0.3, "x": 0.4, "y": 0.5, "z": 0.6, "w": 0.9}
    rho = rank3_family(**params)
    corr = corr_matrix(marginal(rho, (1, 0)), (1, 0))
    link_class = classify_link(corr, params=params)
    assert link_class.rank == 4
    assert link_class.region == "I"
    assert link_class.det_sign == -1


def _rank3_link(params, pair=(1, 0)):
    return corr_matrix(marginal(rank3_family(**params), pair), pair)


# link (1, 0) crosses from region II to region I at w x = y z, i.e. x = 1/3 here
NEAR_BOUNDARY = {"p": 0.3, "y": 0.5, "z": 0.6, "w": 0.9}


@pytest.mark.parametrize("offset, region, sign", [(1e-6, "I", -1), (-1e-6, "II", 1)])
def test_classification_next_to_the_region_boundary(offset, region, sign):
    params = dict(NEAR_BOUNDARY, x=1 / 3 + offset)
    link_class = classify_link(_rank3_link(params), params=params)
    assert link_class.rank == 4
    assert link_class.region == region
    assert link_class.det_sign == sign


def test_classification_rejects_a_region_the_sigma_signs_contradict():
    inside = dict(NEAR_BOUNDARY, x=1 / 3 + 1e-6)
    outside = dict(NEAR_BOUNDARY, x=1 / 3 - 1e-6)
    with pytest.raises(KernelError) as excinfo:
        classify_link(_rank3_link(inside), params=outside)
    assert excinfo.value.details["region"] == "II"


def test_classification_on_the_boundary_skips_the_sign_check():
    params = dict(NEAR_BOUNDARY, x=1 / 3)
    link_class = classify_link(_rank3_link(params), params=params, margin=1e-12)
    assert link_class.region == "boundary"
