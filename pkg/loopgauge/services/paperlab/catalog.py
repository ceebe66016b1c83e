"""
Verification catalog: every quantitative claim about twist, evaluated
numerically against closed forms, theorems or cross-route oracles.

Each claim is a plain function registered with `@claim`. It receives a
`ClaimContext` and returns a `ClaimOutcome`; the runner times it and turns
exceptions into failed results.
"""

import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.optimize import brentq, linear_sum_assignment

from loopgauge.errors import DefectiveLink, LoopGaugeError
from loopgauge.services.paperlab.closed_forms import (
    ALL_COMBINATIONS,
    bell_weights,
    canonical_from_raw,
    rank2_sigma,
    rank3_closed_form,
    rank4_closed_form,
    rank4_critical_p,
)
from loopgauge.services.paperlab.gauges import ghz_proof_gauges, pure_two_qubit_gauge, w_class_gauges
from loopgauge.services.quantum.correlation import (
    BELL_CORRELATIONS,
    ETA,
    LorentzMatrix,
    concurrence_from_sigma,
    concurrence_wootters,
    corr_matrix,
    lorentz_to_sl2,
    sl2_to_lorentz,
    wootters_lambdas,
)
from loopgauge.services.quantum.states import (
    LocalOp,
    apply_local,
    catalog,
    ghz_class_state,
    marginal,
    pure_state,
    random_local_op,
    random_state,
    rank3_family,
    rank4_family,
    w_class_state,
)
from loopgauge.services.twist.holonomy import (
    gauge_transform,
    loop_links,
    transporter,
    twist,
    twist_from_links,
)
from loopgauge.services.twist.lsvd import (
    canonicalize,
    classify_link,
    lorentz_svd_eigen,
    lorentz_svd_iterative,
)
from loopgauge.services.twist.protocol import untwist_protocol

logger = structlog.get_logger()

PI_SPECTRUM = np.array([1.0, -1.0, 1.0, -1.0])
LOOP3 = (0, 1, 2)


@dataclass
class ClaimContext:
    seed: int = 7
    samples: Optional[int] = None

    def rng(self, claim_id: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(claim_id.encode())])

    def count(self, default: int) -> int:
        return default if self.samples is None else min(default, self.samples)


@dataclass
class ClaimOutcome:
    expected: float
    computed: float
    detail: Dict = field(default_factory=dict)
    passed: Optional[bool] = None


@dataclass
class ClaimResult:
    claim_id: str
    statement: str
    provenance: str
    expected: float
    computed: float
    tolerance: float
    passed: bool
    runtime_ms: float
    detail: Dict = field(default_factory=dict)


@dataclass(frozen=True)
class Claim:
    claim_id: str
    statement: str
    provenance: str
    tolerance: float
    func: Callable[[ClaimContext], ClaimOutcome]


CLAIMS: Dict[str, Claim] = {}


def claim(claim_id: str, statement: str, provenance: str, tolerance: float):
    def register(func):
        CLAIMS[claim_id] = Claim(claim_id, statement, provenance, tolerance, func)
        return func

    return register


# Shared helpers

def spectrum_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest gap under the best one-to-one matching of two spectra."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


def _relative(value: float, scale: float) -> float:
    return abs(value) / max(1.0, abs(scale))


def _sigma(corr) -> np.ndarray:
    try:
        return lorentz_svd_eigen(corr).sigma
    except DefectiveLink:
        return transporter(corr, method="sqrt").sigma


def random_ghz_params(rng: np.random.Generator) -> Dict[str, float]:
    return {
        "delta": float(rng.uniform(0.2, np.pi / 4)),
        "alpha": float(rng.uniform(0.3, np.pi / 2)),
        "beta": float(rng.uniform(0.3, np.pi / 2)),
        "gamma": float(rng.uniform(0.3, np.pi / 2)),
        "phi": float(rng.uniform(0.05, 2 * np.pi)),
    }


def random_w_params(rng: np.random.Generator, with_w: bool = True) -> Dict[str, float]:
    return {
        "w": float(rng.uniform(0.0, 1.0)) if with_w else 0.0,
        "x": float(rng.uniform(0.3, 1.0)),
        "y": float(rng.uniform(0.3, 1.0)),
        "z": float(rng.uniform(0.3, 1.0)),
    }


def random_rank3_params(rng: np.random.Generator) -> Dict[str, float]:
    return {
        "p": float(rng.uniform(0.02, 0.95)),
        "x": float(rng.uniform(0.1, 1.0)),
        "y": float(rng.uniform(0.1, 1.0)),
        "z": float(rng.uniform(0.1, 1.0)),
        "w": float(rng.uniform(0.0, 1.5)),
    }


def random_rank4_params(rng: np.random.Generator) -> Dict[str, float]:
    return {
        "p": float(rng.uniform(0.02, 0.98)),
        "x": float(rng.uniform(0.2, 1.0)),
        "y": float(rng.uniform(0.2, 1.0)),
        "z": float(rng.uniform(0.2, 1.0)),
    }


def _generic_rank3(prediction, margin: float = 1e-6) -> bool:
    if prediction.holonomy_family == "boundary":
        return False
    return all(np.min(np.abs(link.raw_sigma[1:])) > margin for link in prediction.links)


# Two-qubit claims

@claim("two_qubit_untwisted", "xi(ab) = 1 for random full-rank two-qubit states", "theorem", 1e-8)
def _two_qubit_untwisted(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("two_qubit_untwisted")
    worst, worst_iterative = 1.0, 1.0
    n = ctx.count(1000)
    for i in range(n):
        rho = random_state(2, rng)
        xi = twist(rho, (0, 1)).xi
        if abs(xi - 1.0) > abs(worst - 1.0):
            worst = xi
        if i < ctx.count(20):
            xi_it = twist(rho, (0, 1), method="iterative").xi
            if abs(xi_it - 1.0) > abs(worst_iterative - 1.0):
                worst_iterative = xi_it
    passed = abs(worst - 1.0) <= 1e-8 and abs(worst_iterative - 1.0) <= 1e-6
    return ClaimOutcome(1.0, worst, {"states": n, "worst_iterative": worst_iterative}, passed)


@claim("pure_two_qubit_singlet", "alpha|00>+beta|11> gauges to alpha*beta times the singlet", "closed form", 1e-12)
def _pure_two_qubit_singlet(ctx: ClaimContext) -> ClaimOutcome:
    alpha = 0.6
    beta = float(np.sqrt(1 - alpha ** 2))
    u, a = pure_two_qubit_gauge(alpha, beta)
    rho = pure_state([alpha, 0, 0, beta])
    s = corr_matrix(rho).S
    target = alpha * beta * np.diag([1.0, -1.0, -1.0, -1.0])
    gauged = u @ s
    via_state = corr_matrix(apply_local(rho, [a, None], renormalize=False).state).S
    image_gap = float(np.max(np.abs(sl2_to_lorentz(a).U - u)))
    sigma = lorentz_svd_iterative(corr_matrix(rho)).sigma
    gap = max(
        float(np.max(np.abs(gauged - target))),
        float(np.max(np.abs(via_state - target))),
        image_gap,
    )
    sigma_gap = float(np.max(np.abs(sigma - np.diag(target))))
    passed = gap <= 1e-12 and sigma_gap <= 1e-6
    return ClaimOutcome(0.0, gap, {"sigma": sigma.tolist(), "sigma_gap": sigma_gap}, passed)


@claim("werner_concurrence_zero", "the Werner link has concurrence exactly zero", "closed form", 1e-12)
def _werner(ctx: ClaimContext) -> ClaimOutcome:
    rho = catalog("werner_third")
    sigma = lorentz_svd_eigen(corr_matrix(rho)).sigma
    c_sigma = concurrence_from_sigma(sigma)
    c_wootters = concurrence_wootters(rho)
    return ClaimOutcome(0.0, max(c_sigma, c_wootters), {"sigma": sigma.tolist()})


@claim("concurrence_consistency", "max(0, -tr Sigma) equals the Wootters concurrence", "cross-route oracle", 1e-9)
def _concurrence(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("concurrence_consistency")
    worst = 0.0
    entangled = 0
    n = ctx.count(1000)
    for _ in range(n):
        rho = random_state(2, rng)
        c_w = concurrence_wootters(rho)
        entangled += c_w > 0
        worst = max(worst, abs(concurrence_from_sigma(_sigma(corr_matrix(rho))) - c_w))
    return ClaimOutcome(0.0, worst, {"states": n, "entangled": int(entangled)})


@claim("homomorphism", "the SL(2,C) image is a homomorphism into SO+(1,3)", "group law", 1e-10)
def _homomorphism(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("homomorphism")
    worst = 0.0
    n = ctx.count(1000)
    for i in range(n):
        a, b = random_local_op(rng), random_local_op(rng)
        ua, ub = sl2_to_lorentz(a).U, sl2_to_lorentz(b).U
        uab = sl2_to_lorentz(LocalOp(a.matrix @ b.matrix)).U
        scale = max(1.0, float(np.max(np.abs(uab))))
        worst = max(worst, float(np.max(np.abs(uab - ua @ ub))) / scale)
        inverse_gap = np.max(np.abs(ETA @ ua.T @ ETA @ ua - np.eye(4))) / max(1.0, float(np.max(np.abs(ua))) ** 2)
        worst = max(worst, float(inverse_gap))
        back = lorentz_to_sl2(LorentzMatrix(ua)).matrix
        sign_gap = min(np.max(np.abs(back - a.matrix)), np.max(np.abs(back + a.matrix)))
        worst = max(worst, float(sign_gap) / max(1.0, float(np.max(np.abs(a.matrix)))))
        if i < ctx.count(50):
            rho = random_state(2, rng)
            moved = apply_local(rho, [a, b], renormalize=False).state
            covariance = corr_matrix(moved).S - ua @ corr_matrix(rho).S @ ub.T
            worst = max(worst, float(np.max(np.abs(covariance))) / scale)
    return ClaimOutcome(0.0, worst, {"samples": n})


@claim("route_agreement", "eigen, iterative and sqrt routes agree; canonical form is stable", "cross-route oracle", 1e-5)
def _routes(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("route_agreement")
    sigma_gap = lambda_gap = ordering_gap = idempotence_gap = 0.0
    n = ctx.count(500)
    for _ in range(n):
        corr = corr_matrix(random_state(2, rng))
        eigen = lorentz_svd_eigen(corr)
        iterative = lorentz_svd_iterative(corr)
        sqrt = transporter(corr, method="sqrt")
        sigma_gap = max(sigma_gap, float(np.max(np.abs(eigen.sigma - iterative.sigma))))
        sigma_gap = max(sigma_gap, float(np.max(np.abs(eigen.sigma - sqrt.sigma))))
        lam = eigen.transporter
        lambda_gap = max(lambda_gap, float(np.max(np.abs(lam - iterative.transporter))))
        lambda_gap = max(lambda_gap, float(np.max(np.abs(lam - sqrt.U))))

        again = canonicalize(eigen.V.U, eigen.sigma, eigen.W.U, s=corr.S)
        idempotence_gap = max(idempotence_gap, float(np.max(np.abs(again.V.U - eigen.V.U))))
        if again.corrections:
            idempotence_gap = max(idempotence_gap, 1.0)

        order = np.concatenate(([0], rng.permutation(3) + 1))
        perm = np.eye(4)[:, order]
        if np.linalg.det(perm) < 0:
            perm[:, 3] *= -1.0
        shuffled = canonicalize(eigen.V.U @ perm, eigen.sigma[order], eigen.W.U @ perm, s=corr.S)
        ordering_gap = max(ordering_gap, float(np.max(np.abs(shuffled.transporter - lam))))

    passed = sigma_gap <= 1e-6 and lambda_gap <= 1e-5 and ordering_gap <= 1e-9 and idempotence_gap <= 1e-12
    detail = {
        "links": n,
        "sigma_gap": sigma_gap,
        "lambda_gap": lambda_gap,
        "ordering_gap": ordering_gap,
        "idempotence_gap": idempotence_gap,
    }
    return ClaimOutcome(0.0, lambda_gap, detail, passed)


# Three-qubit claims

def _pi_gap(report) -> float:
    return max(abs(report.xi), spectrum_distance(report.eigenvalues, PI_SPECTRUM))


@claim("pure3_pi_rotation", "every pure genuinely entangled three-qubit state has a pi-rotation holonomy", "theorem", 1e-6)
def _pure3(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("pure3_pi_rotation")
    worst = 0.0
    defective = 0
    n_ghz, n_w = ctx.count(500), ctx.count(200)
    for _ in range(n_ghz):
        rho = ghz_class_state(**random_ghz_params(rng))
        worst = max(worst, _pi_gap(twist(rho, LOOP3)))
    for i in range(n_w):
        rho = w_class_state(**random_w_params(rng, with_w=i % 2 == 0))
        worst = max(worst, _pi_gap(twist(rho, LOOP3)))
        if i < ctx.count(20):
            for link in loop_links(rho, LOOP3):
                try:
                    transporter(link, method="eigen")
                except DefectiveLink:
                    defective += 1
    return ClaimOutcome(0.0, worst, {"ghz_states": n_ghz, "w_states": n_w, "eigen_defective_links": defective})


def _mixture_claim(name: str, target_sigma: np.ndarray) -> ClaimOutcome:
    report = twist(catalog(name), LOOP3)
    holonomy_gap = float(np.max(np.abs(report.holonomy - np.eye(4))))
    sigma_gap = max(float(np.max(np.abs(t.sigma - target_sigma))) for t in report.links)
    detail = {"xi": report.xi, "sigma": [t.sigma.tolist() for t in report.links], "holonomy_gap": holonomy_gap}
    return ClaimOutcome(0.0, max(holonomy_gap, sigma_gap), detail)


@claim("singlet_mixture_untwisted", "equal singlet mixture: Werner links and identity holonomy", "closed form", 1e-10)
def _singlet_mixture(ctx: ClaimContext) -> ClaimOutcome:
    return _mixture_claim("singlet_mixture_3q", np.array([0.5, -1 / 6, -1 / 6, -1 / 6]))


@claim("ghz_w_mixture_untwisted", "GHZ/W mixture: triplet-mixture links and identity holonomy", "closed form", 1e-10)
def _ghz_w_mixture(ctx: ClaimContext) -> ClaimOutcome:
    target = np.array([0.5, 1 / 6, 1 / 6, 1 / 6])
    outcome = _mixture_claim("ghz_w_mixture_3q", target)
    weights = bell_weights(target)
    outcome.detail["bell_weights"] = weights
    expected_weights = {"bell_psi_minus": 0.0, "bell_psi_plus": 1 / 3, "bell_phi_minus": 1 / 3, "bell_phi_plus": 1 / 3}
    gap = max(abs(weights[k] - v) for k, v in expected_weights.items())
    outcome.computed = max(outcome.computed, gap)
    return outcome


@claim("ghz_proof_gauges", "hand-built GHZ gauges leave xi = 0 and the pi-rotation spectrum", "gauge invariance", 1e-8)
def _ghz_gauges(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("ghz_proof_gauges")
    worst = 0.0
    off_diagonal = 0.0
    n = ctx.count(20)
    for _ in range(n):
        params = random_ghz_params(rng)
        links = loop_links(ghz_class_state(**params), LOOP3)
        a, b, c = ghz_proof_gauges(**params)
        gauged = gauge_transform(links, {0: a, 1: b, 2: c}).links
        report = twist_from_links(gauged, LOOP3)
        worst = max(worst, _pi_gap(report))
        for corr in gauged:
            s = corr.S
            off_diagonal = max(off_diagonal, float(np.max(np.abs(s - np.diag(np.diag(s))))) / abs(s[0, 0]))
    return ClaimOutcome(0.0, worst, {"states": n, "max_off_diagonal": off_diagonal})


def _filtered_link(rho, pair: Tuple[int, int], ops: Dict[int, LocalOp]):
    reduced = marginal(rho, pair)
    moved = apply_local(reduced, [ops[pair[0]], ops[pair[1]]], renormalize=False).state
    return corr_matrix(moved, pair)


_W_TARGETS = {
    (1, 0): BELL_CORRELATIONS["bell_psi_minus"],
    (2, 1): BELL_CORRELATIONS["bell_psi_minus"],
    (0, 2): BELL_CORRELATIONS["bell_psi_plus"],
}


@claim("quasi_distillation", "sharpened W-class gauges drive the links to Bell correlations", "closed form limit", 1e-6)
def _quasi_distillation(ctx: ClaimContext) -> ClaimOutcome:
    params = {"w": 0.0, "x": 0.5, "y": 0.6, "z": 0.7}
    rho = w_class_state(**params)
    distances = {}
    for n in (10, 100, 1000):
        ops = dict(enumerate(w_class_gauges(n=n, **params)))
        gap = 0.0
        for pair, target in _W_TARGETS.items():
            s = _filtered_link(rho, pair, ops).S
            gap = max(gap, float(np.max(np.abs(s / s[0, 0] - target / target[0, 0]))))
        distances[n] = gap

    defective = []
    for link in loop_links(rho, LOOP3):
        try:
            transporter(link, method="eigen")
        except DefectiveLink:
            defective.append(list(link.pair))
    report = twist(rho, LOOP3, method="sqrt")

    values = [distances[n] for n in sorted(distances)]
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    final = values[-1]
    passed = decreasing and final <= 1e-6 and _pi_gap(report) <= 1e-6
    detail = {"distances": {str(k): v for k, v in distances.items()}, "eigen_defective_links": defective, "xi": report.xi}
    return ClaimOutcome(0.0, final, detail, passed)


@claim("gauge_invariance", "xi and the holonomy spectrum are unchanged by local SL(2,C) gauges", "invariance oracle", 1e-8)
def _gauge_invariance(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("gauge_invariance")
    worst = 0.0
    n = ctx.count(200)
    for _ in range(n):
        links = loop_links(random_state(3, rng), LOOP3)
        ops = {q: random_local_op(rng, spread=0.5) for q in LOOP3}
        before = twist_from_links(links, LOOP3)
        after = twist_from_links(gauge_transform(links, ops).links, LOOP3)
        scale = max(1.0, float(np.max(np.abs(before.eigenvalues))))
        worst = max(worst, _relative(after.xi - before.xi, before.xi))
        worst = max(worst, spectrum_distance(after.eigenvalues, before.eigenvalues) / scale)
    return ClaimOutcome(0.0, worst, {"states": n})


@claim("untwist_protocol", "the protocol's closing mismatch has the holonomy's spectrum", "theorem", 1e-7)
def _protocol(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("untwist_protocol")
    worst = 0.0
    n = ctx.count(50)
    for _ in range(n):
        trace = untwist_protocol(random_state(3, rng), LOOP3)
        scale = max(1.0, float(np.max(np.abs(trace.mismatch_eigenvalues))))
        worst = max(worst, spectrum_distance(trace.mismatch_eigenvalues, np.linalg.eigvals(trace.holonomy)) / scale)
    ghz = untwist_protocol(ghz_class_state(**random_ghz_params(rng)), LOOP3)
    ghz_gap = spectrum_distance(ghz.mismatch_eigenvalues, PI_SPECTRUM)
    worst = max(worst, ghz_gap)
    return ClaimOutcome(0.0, worst, {"states": n, "ghz_mismatch_gap": ghz_gap, "ghz_weight": ghz.total_weight})


@claim("rank2_sigma_structure", "rank-2 links have sigma = (y, -x, -x, -y) from the Wootters eigenvalues", "closed form", 1e-6)
def _rank2(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("rank2_sigma_structure")
    worst = 0.0
    n = ctx.count(50)
    for _ in range(n):
        rho = ghz_class_state(**random_ghz_params(rng))
        for corr, pair in zip(loop_links(rho, LOOP3), [(1, 0), (2, 1), (0, 2)]):
            lambdas = np.sort(wootters_lambdas(marginal(rho, pair)))[::-1]
            expected = canonical_from_raw(rank2_sigma(lambdas))
            worst = max(worst, float(np.max(np.abs(transporter(corr).sigma - expected))))
    return ClaimOutcome(0.0, worst, {"states": n})


# Mixed-family claims

RANK3_ANCHORS = (
    {"p": 0.01, "x": 0.2, "y": 0.3, "z": 0.9, "w": 1.0},
    {"p": 0.05, "x": 0.2, "y": 0.3, "z": 0.9, "w": 1.0},
)
RANK3_GENERIC_MARGIN = 1e-3
RANK4_GENERIC_MARGIN = 1e-4


def _rank3_state(params: Dict[str, float]):
    return rank3_family(params["p"], params["x"], params["y"], params["z"], params["w"])


def _rank3_grid(ctx: ClaimContext, claim_id: str, default: int) -> List[Dict[str, float]]:
    rng = ctx.rng(claim_id)
    return [random_rank3_params(rng) for _ in range(ctx.count(default))]


def _compare_rank3(params: Dict[str, float]) -> Optional[Tuple[float, str]]:
    prediction = rank3_closed_form(**params)
    if not _generic_rank3(prediction, RANK3_GENERIC_MARGIN):
        return None
    report = twist(_rank3_state(params), LOOP3)
    gap = _relative(report.xi - prediction.xi, prediction.xi)
    scale = max(1.0, float(np.max(np.abs(prediction.eigenvalues))))
    gap = max(gap, spectrum_distance(report.eigenvalues, prediction.eigenvalues) / scale)
    return gap, prediction.combination


@claim("rank3_sigma_closed_form", "rank-3 family links match the closed-form canonical sigma", "closed form", 1e-8)
def _rank3_sigma(ctx: ClaimContext) -> ClaimOutcome:
    worst = 0.0
    checked = 0
    for params in _rank3_grid(ctx, "rank3_sigma_closed_form", 100):
        prediction = rank3_closed_form(**params)
        if not _generic_rank3(prediction, RANK3_GENERIC_MARGIN):
            continue
        rho = _rank3_state(params)
        for link, corr in zip(prediction.links, loop_links(rho, LOOP3)):
            sigma = _sigma(corr)
            worst = max(worst, float(np.max(np.abs(sigma - link.sigma))) / link.sigma[0])
        checked += 1
    return ClaimOutcome(0.0, worst, {"points": checked})


@claim("rank3_regions", "region labels match the link determinant sign and concurrence", "closed form", 1e-9)
def _rank3_regions(ctx: ClaimContext) -> ClaimOutcome:
    worst = 0.0
    sign_mismatches = 0
    checked = 0
    for params in _rank3_grid(ctx, "rank3_regions", 100):
        prediction = rank3_closed_form(**params)
        if not _generic_rank3(prediction, RANK3_GENERIC_MARGIN):
            continue
        rho = _rank3_state(params)
        for link in prediction.links:
            corr = corr_matrix(marginal(rho, link.pair), link.pair)
            expected_sign = 1 if link.region == "II" else -1
            link_class = classify_link(corr, params=params)
            if link_class.det_sign != expected_sign or link_class.region != link.region:
                sign_mismatches += 1
            c_wootters = concurrence_wootters(marginal(rho, link.pair))
            worst = max(worst, abs(link.concurrence - c_wootters))
            worst = max(worst, abs(concurrence_from_sigma(link.sigma) - c_wootters))
        checked += 1
    passed = sign_mismatches == 0 and worst <= 1e-9
    return ClaimOutcome(0.0, worst, {"points": checked, "sign_mismatches": sign_mismatches}, passed)


@claim("rank3_parity_laws", "rank-3 family holonomy follows the region parity laws", "closed form", 1e-8)
def _rank3_parity(ctx: ClaimContext) -> ClaimOutcome:
    worst = 0.0
    realized = set()
    for params in _rank3_grid(ctx, "rank3_parity_laws", 100):
        compared = _compare_rank3(params)
        if compared is None:
            continue
        gap, combination = compared
        worst = max(worst, gap)
        realized.add(combination)
    detail = {
        "realized": sorted(realized),
        "unrealized": [c for c in ALL_COMBINATIONS if c not in realized],
    }
    return ClaimOutcome(0.0, worst, detail)


@claim("rank3_xi_formulas", "two region-I links give the boost-ratio twist formulas", "closed form", 1e-8)
def _rank3_xi(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("rank3_xi_formulas")
    points = list(RANK3_ANCHORS)
    wanted = ctx.count(40)
    tries = 0
    while len(points) < wanted and tries < 100 * wanted:
        tries += 1
        params = random_rank3_params(rng)
        params["w"] = float(rng.uniform(0.5, 2.0))
        params["p"] = float(rng.uniform(0.01, 0.6))
        prediction = rank3_closed_form(**params)
        if prediction.combination.count("1") == 2 and _generic_rank3(prediction, RANK3_GENERIC_MARGIN):
            points.append(params)

    worst = 0.0
    families: Dict[str, int] = {}
    for params in points:
        compared = _compare_rank3(params)
        if compared is None:
            continue
        worst = max(worst, compared[0])
        family = rank3_closed_form(**params).holonomy_family
        families[family] = families.get(family, 0) + 1
    return ClaimOutcome(0.0, worst, {"points": len(points), "families": families})


def _rank4_xi_gap(params: Dict[str, float]) -> Optional[float]:
    prediction = rank4_closed_form(**params)
    if min(abs(link.s3) for link in prediction.links) < RANK4_GENERIC_MARGIN:
        return None
    report = twist(rank4_family(**params), LOOP3)
    return _relative(report.xi - prediction.xi, prediction.xi)


@claim("rank4_xi_closed_form", "rank-4 family twist is cosh^2 or sinh^2 of half the rapidity sum", "closed form", 1e-8)
def _rank4_xi(ctx: ClaimContext) -> ClaimOutcome:
    rng = ctx.rng("rank4_xi_closed_form")
    points = [{"p": 0.25, "x": 3.0, "y": 2.0, "z": 1.0}]
    points += [random_rank4_params(rng) for _ in range(ctx.count(100))]
    gaps = [g for g in (_rank4_xi_gap(params) for params in points) if g is not None]
    return ClaimOutcome(0.0, max(gaps), {"points": len(gaps)})


RANK4_ZERO_RAPIDITY = (
    {"p": 0.5, "x": 0.9, "y": 0.35, "z": 0.25},
    {"p": 0.2, "x": 1.0, "y": 1.0, "z": 1.0},
    {"p": 0.35, "x": 1.0, "y": 1.0, "z": 1.0},
    {"p": 0.7, "x": 1.0, "y": 1.0, "z": 1.0},
)


@claim("rank4_zero_rapidity", "zero rapidity sum leaves xi in {0, 1} by the link-sign parity", "closed form", 1e-8)
def _rank4_zero(ctx: ClaimContext) -> ClaimOutcome:
    worst = 0.0
    values = []
    for params in RANK4_ZERO_RAPIDITY:
        prediction = rank4_closed_form(**params)
        report = twist(rank4_family(**params), LOOP3)
        worst = max(worst, abs(prediction.rapidity_sum), abs(report.xi - prediction.xi))
        worst = max(worst, min(abs(report.xi), abs(report.xi - 1.0)))
        values.append({"params": params, "xi": report.xi, "negative_links": prediction.negative_links})
    return ClaimOutcome(0.0, worst, {"points": values})


def _det_along(family: Callable[[float], object], pair: Tuple[int, int]) -> Callable[[float], float]:
    return lambda t: corr_matrix(marginal(family(t), pair), pair).det


@claim("rank4_critical_point", "the rank-4 link turns separable where s3 vanishes; p_min = -C/2 there", "closed form", 1e-8)
def _rank4_critical(ctx: ClaimContext) -> ClaimOutcome:
    x, y, z = 0.8, 0.45, float(np.sqrt(0.1575))
    pair = (1, 0)
    p_star = rank4_critical_p(x, y, z, pair=pair)
    det = _det_along(lambda p: rank4_family(p, x, y, z), pair)
    p_numeric = brentq(det, p_star - 1e-3, p_star + 1e-3, xtol=1e-15)

    lambdas = np.sort(wootters_lambdas(marginal(rank4_family(p_star, x, y, z), pair)))[::-1]
    c_signed = float(lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3])
    weight_gap = abs(lambdas[3] + 0.5 * c_signed)
    computed = max(abs(p_numeric - p_star), weight_gap)
    detail = {"p_star": p_star, "p_numeric": float(p_numeric), "signed_concurrence": c_signed, "p_min": float(lambdas[3])}
    return ClaimOutcome(0.0, computed, detail)


@claim("rank3_critical_points", "rank-3 links change determinant sign on the region boundaries", "closed form", 1e-8)
def _rank3_critical(ctx: ClaimContext) -> ClaimOutcome:
    x, y, z = 0.3, 0.5, 0.6
    pair = (1, 0)

    # region I / II: w x = y z with the other amplitudes fixed
    w_star = y * z / x
    det_w = _det_along(lambda w: rank3_family(0.3, x, y, z, w), pair)
    w_numeric = brentq(det_w, w_star * (1 - 1e-3), w_star * (1 + 1e-3), xtol=1e-15)

    # region II / III: y z = eps(w) eps(x) / 2(1 - p)
    w = 0.2
    norm = np.linalg.norm([x, y, z, w])
    xn, yn, zn, wn = (v / norm for v in (x, y, z, w))
    boundary = lambda p: yn * zn - np.sqrt(p + 2 * (1 - p) * wn ** 2) * np.sqrt(p + 2 * (1 - p) * xn ** 2) / (2 * (1 - p))  # noqa: E731
    p_star = brentq(boundary, 1e-6, 0.999, xtol=1e-15)
    det_p = _det_along(lambda p: rank3_family(p, x, y, z, w), pair)
    p_numeric = brentq(det_p, p_star - 1e-3, p_star + 1e-3, xtol=1e-15)

    computed = max(abs(w_numeric - w_star), abs(p_numeric - p_star))
    detail = {"w_star": w_star, "w_numeric": float(w_numeric), "p_star": float(p_star), "p_numeric": float(p_numeric)}
    return ClaimOutcome(0.0, computed, detail)


# Runner

def _run_one(item: Claim, ctx: ClaimContext) -> ClaimResult:
    start = time.perf_counter()
    try:
        outcome = item.func(ctx)
        deviation = abs(outcome.computed - outcome.expected)
        passed = outcome.passed if outcome.passed is not None else deviation <= item.tolerance
        expected, computed, detail = outcome.expected, outcome.computed, outcome.detail
    except LoopGaugeError as e:
        logger.warning("Claim raised", claim=item.claim_id, error=e.message)
        passed, expected, computed = False, float("nan"), float("nan")
        detail = {"error": e.to_dict()}
    except Exception as e:
        logger.exception("Claim crashed", claim=item.claim_id)
        passed, expected, computed = False, float("nan"), float("nan")
        detail = {"error": {"type": type(e).__name__, "message": str(e)}}
    elapsed = (time.perf_counter() - start) * 1000.0
    logger.info("Claim evaluated", claim=item.claim_id, passed=bool(passed), runtime_ms=round(elapsed, 1))
    return ClaimResult(
        claim_id=item.claim_id,
        statement=item.statement,
        provenance=item.provenance,
        expected=expected,
        computed=computed,
        tolerance=item.tolerance,
        passed=bool(passed),
        runtime_ms=elapsed,
        detail=detail,
    )


def verify_catalog(
    selection: Optional[Sequence[str]] = None,
    seed: int = 7,
    samples: Optional[int] = None,
    threads: int = 1,
) -> List[ClaimResult]:
    """Evaluate the selected claims (all by default, in registry order)."""
    names = list(CLAIMS) if not selection else list(selection)
    unknown = [n for n in names if n not in CLAIMS]
    if unknown:
        raise LoopGaugeError("Unknown claim", unknown=unknown, known=list(CLAIMS))
    ctx = ClaimContext(seed=seed, samples=samples)
    items = [CLAIMS[n] for n in names]
    if threads <= 1:
        return [_run_one(item, ctx) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda item: _run_one(item, ctx), items))
