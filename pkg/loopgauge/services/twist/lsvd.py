"""
Lorentz singular value decomposition S = V diag(sigma) W^T.

Two routes produce the raw factors: an eigenproblem route over
S^T eta S eta and an iterative rotate-and-boost depolarization. Both finish
in `canonicalize`, which fixes the signature convention:

    s0 > 0, |s1| >= |s2| >= |s3|, s1..s3 share the sign of det S,
    V and W proper orthochronous.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from loopgauge.config import resolve
from loopgauge.errors import (
    ConvergenceError,
    DefectiveLink,
    GroupElementError,
    KernelError,
    ProductStateLink,
    RankDeficientLink,
)
from loopgauge.services.quantum.correlation import (
    ETA,
    CorrelationMatrix,
    LorentzMatrix,
    align_to_z,
    boost,
    lorentz_project,
)
from loopgauge.services.quantum.qlinalg import RealMatrix4, eig_real4

logger = structlog.get_logger()

CLUSTER_TOLERANCE = 1e-7
BLOCH_TOLERANCE = 1e-12
MAX_STEP_NORM = 0.9

# Rank-3 family amplitude carried by each qubit: |100> -> z, |010> -> y, |001> -> x.
RANK3_AMPLITUDE_OF_QUBIT = ("z", "y", "x")


@dataclass(frozen=True)
class LorentzSvd:
    V: LorentzMatrix
    W: LorentzMatrix
    sigma: np.ndarray
    method: str
    residual: float
    corrections: List[Dict] = field(default_factory=list)

    @property
    def transporter(self) -> RealMatrix4:
        """Left transporter V eta W^T eta."""
        return self.V.U @ ETA @ self.W.U.T @ ETA

    def reconstruct(self) -> RealMatrix4:
        return self.V.U @ np.diag(self.sigma) @ self.W.U.T


@dataclass(frozen=True)
class LinkClass:
    rank: int
    det_sign: int
    degenerate: bool
    region: Optional[str] = None


def reconstruction_residual(s: RealMatrix4, v: RealMatrix4, sigma: np.ndarray, w: RealMatrix4) -> float:
    scale = max(abs(float(s[0, 0])), 1e-300)
    return float(np.linalg.norm(s - v @ np.diag(sigma) @ w.T) / scale)


def check_rank(corr: CorrelationMatrix, tolerance: float) -> None:
    rank = corr.rank(tolerance)
    if rank == 4:
        return
    if rank <= 1:
        raise ProductStateLink("Link correlations factorize; no transporter exists", link=corr.pair, rank=rank)
    raise RankDeficientLink("Link correlation matrix is rank deficient", link=corr.pair, rank=rank)


# Canonical signature

def _sorting_permutation(sigma: np.ndarray) -> np.ndarray:
    order = np.argsort(-np.abs(sigma[1:]), kind="stable") + 1
    return np.concatenate(([0], order))


def canonicalize(
    v: RealMatrix4,
    sigma: Sequence[float],
    w: RealMatrix4,
    method: str = "raw",
    s: Optional[RealMatrix4] = None,
) -> LorentzSvd:
    """Bring a raw decomposition into the canonical signature.

    `v` and `w` must preserve the metric; V diag(sigma) W^T is left unchanged
    by every step.
    """
    v = np.array(v, dtype=float)
    w = np.array(w, dtype=float)
    sigma = np.array(sigma, dtype=float)
    if s is None:
        s = v @ np.diag(sigma) @ w.T
    corrections: List[Dict] = []

    for side, m in (("V", v), ("W", w)):
        if m[0, 0] < 0.0:
            m *= -1.0
            sigma *= -1.0
            corrections.append({"kind": "time_reversal", "side": side})
    for side, m in (("V", v), ("W", w)):
        if np.linalg.det(m) < 0.0:
            m[:, 3] *= -1.0
            sigma[3] *= -1.0
            corrections.append({"kind": "reflection", "side": side, "axis": 3})

    if sigma[0] <= 0.0:
        raise KernelError("Impossible signature: time-like singular value is not positive", sigma=sigma.tolist())

    spatial = sigma[1:]
    target = np.sign(np.prod(spatial))
    if target != 0.0:
        wrong = [i + 1 for i, value in enumerate(spatial) if np.sign(value) not in (0.0, target)]
        if len(wrong) % 2:
            raise KernelError("Impossible signature: odd sign defect", sigma=sigma.tolist())
        if wrong:
            d = np.ones(4)
            d[wrong] = -1.0
            w = w * d
            sigma = sigma * d
            corrections.append({"kind": "pi_rotation", "side": "W", "axes": wrong})

    order = _sorting_permutation(sigma)
    if not np.array_equal(order, np.arange(4)):
        p = np.eye(4)[:, order]
        v = v @ p
        w = w @ p
        sigma = sigma[order]
        if np.linalg.det(p) < 0.0:
            v[:, 3] *= -1.0
            w[:, 3] *= -1.0
        corrections.append({"kind": "permutation", "order": order.tolist()})

    v, w = lorentz_project(v), lorentz_project(w)
    residual = reconstruction_residual(s, v, sigma, w)
    return LorentzSvd(LorentzMatrix(v), LorentzMatrix(w), sigma, method, residual, corrections)


# Eigenproblem route

def _clusters(values: np.ndarray, scale: float) -> List[Tuple[float, int]]:
    clusters: List[List[float]] = []
    for value in values:
        if clusters and abs(clusters[-1][-1] - value) <= CLUSTER_TOLERANCE * scale:
            clusters[-1].append(value)
        else:
            clusters.append([value])
    return [(float(np.mean(c)), len(c)) for c in clusters]


def _eigenbasis(m: RealMatrix4, link, defect_condition: float) -> Tuple[RealMatrix4, np.ndarray]:
    """Real eta-orthonormal eigenbasis of an eta-self-adjoint matrix."""
    system = eig_real4(m, defect_condition)
    values = system.eigenvalues
    scale = max(float(np.max(np.abs(values))), 1e-300)
    if np.max(np.abs(values.imag)) > CLUSTER_TOLERANCE * scale:
        raise DefectiveLink(
            "Eigenproblem has complex eigenvalues; use the sqrt route",
            link=link,
            eigenvalues=[[float(x.real), float(x.imag)] for x in values],
        )
    clusters = _clusters(np.sort(values.real)[::-1], scale)
    if system.defect_flag and all(k == 1 for _, k in clusters):
        raise DefectiveLink("Eigenvector matrix is singular; use the sqrt route", link=link, condition=system.condition)

    columns, norms, eigenvalues = [], [], []
    for value, k in clusters:
        _, singular, vt = np.linalg.svd(m - value * np.eye(4))
        if singular[4 - k] > CLUSTER_TOLERANCE * scale * 10:
            raise DefectiveLink(
                "Eigenvalue has a deficient eigenspace; use the sqrt route",
                link=link,
                eigenvalue=value,
                multiplicity=k,
            )
        basis = vt[4 - k:].T
        gram = basis.T @ ETA @ basis
        g_values, g_vectors = np.linalg.eigh(0.5 * (gram + gram.T))
        if np.min(np.abs(g_values)) <= 1.0 / defect_condition:
            raise DefectiveLink("Eigenspace contains a null direction; use the sqrt route", link=link, eigenvalue=value)
        for g, vec in zip(g_values, g_vectors.T):
            columns.append(basis @ vec / np.sqrt(abs(g)))
            norms.append(np.sign(g))
            eigenvalues.append(value)

    norms = np.array(norms)
    if np.sum(norms > 0) != 1:
        raise DefectiveLink("Eigenbasis lacks a single time-like direction", link=link, norms=norms.tolist())
    first = int(np.argmax(norms))
    order = [first] + [i for i in range(4) if i != first]
    basis = np.column_stack([columns[i] for i in order])
    if basis[0, 0] < 0.0:
        basis[:, 0] *= -1.0
    if np.linalg.det(basis) < 0.0:
        basis[:, 3] *= -1.0
    return basis, np.array([eigenvalues[i] for i in order])


def lorentz_svd_eigen(
    corr: CorrelationMatrix,
    tolerance: Optional[float] = None,
    rank_tolerance: Optional[float] = None,
    defect_condition: Optional[float] = None,
) -> LorentzSvd:
    """Eigen route; fails with DefectiveLink when the residual exceeds `tolerance`."""
    tolerance = resolve(tolerance, "tolerance")
    rank_tolerance = resolve(rank_tolerance, "rank_tolerance")
    defect_condition = resolve(defect_condition, "defect_condition")
    check_rank(corr, rank_tolerance)
    s = corr.S
    m_w = s.T @ ETA @ s @ ETA
    w, squares = _eigenbasis(m_w, corr.pair, defect_condition)

    m_v = s @ ETA @ s.T @ ETA
    paired = np.sort(np.linalg.eigvals(m_v).real)[::-1]
    gap = float(np.max(np.abs(paired - np.sort(squares)[::-1])))
    if gap > CLUSTER_TOLERANCE * max(float(np.max(np.abs(squares))), 1e-300) * 10:
        raise DefectiveLink("Left and right eigenproblems do not pair", link=corr.pair, gap=gap)

    p = s @ ETA @ w @ ETA  # = V Sigma
    lengths = np.einsum("ik,ij,jk->k", p, ETA, p)
    sigma = np.sqrt(np.abs(lengths))
    if sigma[0] == 0.0 or np.min(sigma) <= rank_tolerance * sigma[0]:
        raise RankDeficientLink("Link correlation matrix is rank deficient", link=corr.pair)
    if p[0, 0] < 0.0:
        sigma[0] *= -1.0
    v = p / sigma
    if np.linalg.det(v) < 0.0:
        sigma[3] *= -1.0
        v[:, 3] *= -1.0

    try:
        result = canonicalize(v, sigma, w, method="eigen", s=s)
    except GroupElementError as e:
        raise DefectiveLink("Eigen-route factors left the Lorentz group", link=corr.pair, **e.details)
    if result.residual > tolerance:
        raise DefectiveLink("Eigen-route reconstruction above tolerance", link=corr.pair, residual=result.residual)
    logger.debug("Eigen-route decomposition", link=corr.pair, sigma=result.sigma.tolist(), residual=result.residual)
    return result


# Iterative route

def _depolarizing_step(bloch: np.ndarray) -> RealMatrix4:
    norm = float(np.linalg.norm(bloch))
    rapidity = -0.5 * np.arctanh(min(norm, MAX_STEP_NORM))
    return boost([0.0, 0.0, 1.0], rapidity) @ align_to_z(bloch)


def _signed_svd3(block: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    e, d, ft = np.linalg.svd(block)
    f = ft.T
    if np.linalg.det(e) < 0.0:
        e[:, 2] *= -1.0
        d[2] *= -1.0
    if np.linalg.det(f) < 0.0:
        f[:, 2] *= -1.0
        d[2] *= -1.0
    return e, d, f


def lorentz_svd_iterative(
    corr: CorrelationMatrix,
    tolerance: Optional[float] = None,
    rank_tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> LorentzSvd:
    tolerance = resolve(tolerance, "iterative_tolerance")
    max_iterations = resolve(max_iterations, "max_iterations")
    check_rank(corr, resolve(rank_tolerance, "rank_tolerance"))
    s = corr.S
    current = s.copy()
    left = np.eye(4)
    right = np.eye(4)

    steps = 0
    while True:
        a = current[1:, 0] / current[0, 0]
        b = current[0, 1:] / current[0, 0]
        norm_a, norm_b = float(np.linalg.norm(a)), float(np.linalg.norm(b))
        if norm_a < BLOCH_TOLERANCE and norm_b < BLOCH_TOLERANCE:
            break
        if steps >= max_iterations:
            raise ConvergenceError(
                "Depolarization did not converge",
                link=corr.pair,
                iterations=steps,
                bloch_norm_first=norm_a,
                bloch_norm_second=norm_b,
            )
        if norm_a >= BLOCH_TOLERANCE:
            k = _depolarizing_step(a)
            current = k @ current
            left = k @ left
        b = current[0, 1:] / current[0, 0]
        if np.linalg.norm(b) >= BLOCH_TOLERANCE:
            k = _depolarizing_step(b)
            current = current @ k.T
            right = k @ right
        steps += 1

    e, d, f = _signed_svd3(current[1:, 1:])
    e4, f4 = np.eye(4), np.eye(4)
    e4[1:, 1:] = e
    f4[1:, 1:] = f
    sigma = np.concatenate(([current[0, 0]], d))
    v = ETA @ left.T @ ETA @ e4
    w = ETA @ right.T @ ETA @ f4

    try:
        result = canonicalize(v, sigma, w, method="iterative", s=s)
    except GroupElementError as e:
        raise ConvergenceError("Depolarization drifted off the Lorentz group", link=corr.pair, **e.details)
    if result.residual > tolerance:
        raise ConvergenceError("Iterative-route reconstruction above tolerance", link=corr.pair, residual=result.residual)
    logger.debug("Iterative-route decomposition", link=corr.pair, steps=steps, residual=result.residual)
    return result


def lorentz_svd(corr: CorrelationMatrix, method: str = "eigen", **kwargs) -> LorentzSvd:
    if method == "eigen":
        return lorentz_svd_eigen(corr, **kwargs)
    if method == "iterative":
        return lorentz_svd_iterative(corr, **kwargs)
    raise KernelError("Unknown decomposition method", method=method)


# Classification

def rank3_region(p: float, w: float, third: float, pair_product: float, margin: Optional[float] = None) -> str:
    """Region of one rank-3 family link: I or III (det < 0, entangled), II (separable)."""
    margin = resolve(margin, "region_margin")
    if p >= 1.0:
        return "II"
    eps = lambda q: np.sqrt(p + 2.0 * (1.0 - p) * q * q)  # noqa: E731
    first = w * third - pair_product
    threshold = eps(w) * eps(third) / (2.0 * (1.0 - p))
    second = pair_product - threshold
    if abs(first) <= margin or abs(second) <= margin:
        return "boundary"
    if first > 0.0:
        return "I"
    if second > 0.0:
        return "III"
    return "II"


def rank3_link_amplitudes(params: Dict[str, float], pair: Sequence[int]) -> Tuple[float, float, float]:
    """(a_P, a_Q, a_R): amplitudes on the link's two qubits and on the third one."""
    p_qubit, q_qubit = pair
    (r_qubit,) = {0, 1, 2} - {p_qubit, q_qubit}
    amp = lambda q: float(params[RANK3_AMPLITUDE_OF_QUBIT[q]])  # noqa: E731
    return amp(p_qubit), amp(q_qubit), amp(r_qubit)


# Regions I and III carry det S < 0, so every canonical spatial value is negative there.
_REGION_SIGN = {"I": -1.0, "II": 1.0, "III": -1.0}


def _computed_sigma(corr: CorrelationMatrix, rank_tolerance: float) -> Tuple[np.ndarray, bool]:
    """Canonical sigma and whether the eigen route had to be abandoned."""
    try:
        return lorentz_svd(corr, "eigen", rank_tolerance=rank_tolerance).sigma, False
    except DefectiveLink:
        return lorentz_svd(corr, "iterative", rank_tolerance=rank_tolerance).sigma, True


def classify_link(
    corr: CorrelationMatrix,
    params: Optional[Dict[str, float]] = None,
    rank_tolerance: Optional[float] = None,
    margin: Optional[float] = None,
) -> LinkClass:
    """Rank, det sign and degeneracy of a link; the rank-3 region when `params` are given.

    The region from the family inequalities must agree with the signs of the
    computed sigma, otherwise KernelError.
    """
    rank_tolerance = resolve(rank_tolerance, "rank_tolerance")
    values = np.linalg.svd(corr.S, compute_uv=False)
    rank = corr.rank(rank_tolerance)
    det = corr.det
    det_sign = 0 if abs(det) <= rank_tolerance * max(values[0], 1e-300) ** 4 else int(np.sign(det))

    sigma = None
    degenerate = rank < 4
    if rank == 4:
        sigma, defective = _computed_sigma(corr, rank_tolerance)
        spatial = np.abs(sigma[1:])
        degenerate = defective or bool(np.min(np.abs(np.diff(spatial))) <= 1e-9 * sigma[0])

    region = None
    if params is not None and corr.pair is not None:
        norm = float(np.linalg.norm([params[k] for k in ("x", "y", "z", "w")]))
        amps = {k: float(params[k]) / norm for k in ("x", "y", "z", "w")}
        a_p, a_q, a_r = rank3_link_amplitudes(amps, corr.pair)
        region = rank3_region(float(params["p"]), amps["w"], a_r, a_p * a_q, margin)
        if sigma is not None and region in _REGION_SIGN:
            signs = np.sign(sigma[1:])
            if np.any(signs != _REGION_SIGN[region]):
                raise KernelError(
                    "Rank-3 region disagrees with the signs of the computed sigma",
                    link=list(corr.pair),
                    region=region,
                    sigma=sigma.tolist(),
                )
    return LinkClass(rank=rank, det_sign=det_sign, degenerate=degenerate, region=region)
