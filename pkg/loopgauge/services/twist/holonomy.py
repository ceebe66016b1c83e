"""
Parallel transporters on two-qubit links and the twist of a qubit loop.

A link (b, a) carries S(b,a) = Lambda(b,a) S~(b,a) with S~ symmetric. The
twist of a loop q0 -> q1 -> ... -> q0 is a quarter of the trace of the
ordered product of its transporters.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import structlog

from loopgauge.config import resolve
from loopgauge.errors import DefectiveLink, GroupElementError, InvalidStateError, KernelError
from loopgauge.services.quantum.correlation import (
    ETA,
    CorrelationMatrix,
    LorentzMatrix,
    corr_matrix,
    lorentz_project,
    sl2_to_lorentz,
)
from loopgauge.services.quantum.qlinalg import RealMatrix4, eig_real4, principal_sqrt4
from loopgauge.services.quantum.states import DensityMatrix, LocalOp, marginal
from loopgauge.services.twist.lsvd import check_rank, lorentz_svd_eigen, lorentz_svd_iterative

logger = structlog.get_logger()

SPECTRUM_TOLERANCE = 1e-8
DEGENERACY_TOLERANCE = 1e-9
METHODS = ("sqrt", "eigen", "iterative")
SIDES = ("left", "right")


@dataclass(frozen=True)
class Transporter:
    Lambda: LorentzMatrix
    pair: Optional[Tuple[int, int]]
    side: str
    method: str
    sigma: np.ndarray

    @property
    def U(self) -> RealMatrix4:
        return self.Lambda.U


@dataclass(frozen=True)
class TwistReport:
    loop: Tuple[int, ...]
    holonomy: RealMatrix4
    xi: float
    xi_reversed: float
    eigenvalues: np.ndarray
    links: List[Transporter]
    method: str
    side: str = "left"
    lorentz_spectrum: bool = True
    route_gap: Optional[float] = None
    notes: List[str] = field(default_factory=list)


def _asymmetry(m: RealMatrix4) -> float:
    return float(np.max(np.abs(m - m.T)) / max(abs(float(m[0, 0])), 1e-300))


def implied_sigma(symmetrized_left: RealMatrix4) -> np.ndarray:
    """Canonical sigma read off the spectrum of S~ eta, which is (s0, -s1, -s2, -s3)."""
    values = np.sort(np.linalg.eigvals(symmetrized_left @ ETA).real)[::-1]
    s0 = values[0]
    spatial = -values[1:]
    spatial = spatial[np.argsort(-np.abs(spatial), kind="stable")]
    return np.concatenate(([s0], spatial))


def _generators() -> List[RealMatrix4]:
    out = []
    for i in range(1, 4):
        k = np.zeros((4, 4))
        k[0, i] = k[i, 0] = 1.0
        out.append(k)
    for i, j in ((1, 2), (1, 3), (2, 3)):
        r = np.zeros((4, 4))
        r[i, j], r[j, i] = 1.0, -1.0
        out.append(r)
    return out


_GENERATORS = _generators()
_UPPER = np.triu_indices(4, 1)


def _antisymmetric(m: RealMatrix4) -> np.ndarray:
    return 0.5 * (m - m.T)[_UPPER]


def _polish(lam: RealMatrix4, s: RealMatrix4, rounds: int = 3) -> RealMatrix4:
    """Refine Lambda within SO+(1,3) until Lambda^-1 S is symmetric to round-off.

    Each round solves the linearized condition anti(K S~) = anti(S~) for K in
    the Lorentz algebra and moves Lambda -> Lambda exp(K).
    """
    lam = lorentz_project(lam)
    for _ in range(rounds):
        tilde = ETA @ lam.T @ ETA @ s
        rhs = _antisymmetric(tilde)
        if np.max(np.abs(rhs)) <= 1e-15 * abs(float(s[0, 0])):
            break
        system = np.stack([_antisymmetric(g @ tilde) for g in _GENERATORS], axis=1)
        coeffs = np.linalg.lstsq(system, rhs, rcond=None)[0]
        if np.max(np.abs(coeffs)) > 1e-3:
            break
        lam = lorentz_project(lam @ scipy.linalg.expm(sum(c * g for c, g in zip(coeffs, _GENERATORS))))
    return lam


def _sqrt_lambda(corr: CorrelationMatrix) -> RealMatrix4:
    s = corr.S
    m = s.T @ ETA @ s @ ETA
    root = principal_sqrt4(m)
    lam = s @ ETA @ np.linalg.inv(root)
    if corr.det > 0.0:
        # Spatial singular values are positive: swap the principal root onto
        # the branch with a single positive eigenvalue along the time-like axis.
        system = eig_real4(m)
        values = system.eigenvalues.real
        if len(values) > 1 and values[0] - values[1] <= 1e-10 * abs(values[0]):
            raise DefectiveLink("Leading eigenvalue is not simple", link=corr.pair, eigenvalues=values.tolist())
        v = system.eigenvectors[:, 0].real
        norm = float(v @ ETA @ v)
        if norm <= 0.0:
            raise DefectiveLink("Leading eigenvector is not time-like", link=corr.pair)
        j = 2.0 * np.outer(v, v) @ ETA / norm - np.eye(4)
        lam = lam @ j
    return lam


def transporter_sqrt(
    corr: CorrelationMatrix,
    tolerance: Optional[float] = None,
    rank_tolerance: Optional[float] = None,
) -> Transporter:
    """Lambda = S eta M^(-1/2), M = S^T eta S eta; `tolerance` bounds the asymmetry of Lambda^-1 S."""
    check_rank(corr, resolve(rank_tolerance, "rank_tolerance"))
    try:
        lam = LorentzMatrix(_polish(_sqrt_lambda(corr), corr.S))
        symmetric = lam.inverse().U @ corr.S
    except KernelError as e:
        raise DefectiveLink(e.message, link=corr.pair, **e.details)
    except GroupElementError as e:
        raise DefectiveLink("Square-root transporter left the Lorentz group", link=corr.pair, **e.details)
    asymmetry = _asymmetry(symmetric)
    if asymmetry > resolve(tolerance, "tolerance"):
        raise DefectiveLink("Square-root transporter does not symmetrize the link", link=corr.pair, asymmetry=asymmetry)
    return Transporter(lam, corr.pair, "left", "sqrt", implied_sigma(symmetric))


def transporter_eigen(corr: CorrelationMatrix, **kwargs) -> Transporter:
    svd = lorentz_svd_eigen(corr, **kwargs)
    return Transporter(LorentzMatrix(svd.transporter), corr.pair, "left", "eigen", svd.sigma)


def transporter_iterative(corr: CorrelationMatrix, **kwargs) -> Transporter:
    svd = lorentz_svd_iterative(corr, **kwargs)
    return Transporter(LorentzMatrix(svd.transporter), corr.pair, "left", "iterative", svd.sigma)


_ROUTES = {
    "sqrt": transporter_sqrt,
    "eigen": transporter_eigen,
    "iterative": transporter_iterative,
}


def transporter(corr: CorrelationMatrix, method: str = "sqrt", side: str = "left", **kwargs) -> Transporter:
    """Left transporter solves S = Lambda S~; the right one S = S~' Lambda'."""
    if method not in _ROUTES:
        raise KernelError("Unknown transporter method", method=method, known=list(METHODS))
    if side not in SIDES:
        raise KernelError("Unknown polar side", side=side, known=list(SIDES))
    left = _ROUTES[method](corr, **kwargs)
    if side == "left":
        return left
    return Transporter(LorentzMatrix(ETA @ left.U @ ETA), corr.pair, "right", method, left.sigma)


def symmetrized(corr: CorrelationMatrix, side: str = "left", method: str = "sqrt") -> CorrelationMatrix:
    t = transporter(corr, method=method, side=side)
    if side == "left":
        out = t.Lambda.inverse().U @ corr.S
    else:
        out = corr.S @ t.Lambda.inverse().U
    return CorrelationMatrix(0.5 * (out + out.T), corr.pair)


# Loops

def _validate_loop(loop: Sequence[int], n_qubits: int) -> Tuple[int, ...]:
    loop = tuple(int(q) for q in loop)
    if len(loop) < 2:
        raise InvalidStateError("A loop needs at least two qubits", loop=list(loop))
    if len(set(loop)) != len(loop):
        raise InvalidStateError("Loop visits a qubit twice", loop=list(loop))
    if any(q < 0 or q >= n_qubits for q in loop):
        raise InvalidStateError("Loop names a qubit outside the state", loop=list(loop), n_qubits=n_qubits)
    return loop


def loop_pairs(loop: Sequence[int]) -> List[Tuple[int, int]]:
    """Links (q1,q0), (q2,q1), ..., (q0,q_{n-1}) in transport order."""
    n = len(loop)
    return [(loop[(k + 1) % n], loop[k]) for k in range(n)]


def loop_links(rho: DensityMatrix, loop: Sequence[int]) -> List[CorrelationMatrix]:
    loop = _validate_loop(loop, rho.n_qubits)
    return [corr_matrix(marginal(rho, pair), pair) for pair in loop_pairs(loop)]


def is_lorentz_spectrum(values: np.ndarray, tolerance: float = SPECTRUM_TOLERANCE) -> bool:
    """Spectrum closed under inversion and conjugation."""
    values = np.asarray(values, dtype=complex)
    if np.min(np.abs(values)) == 0.0:
        return False
    scale = max(1.0, float(np.max(np.abs(values))))
    for target in (1.0 / values, values.conj()):
        for t in target:
            if np.min(np.abs(values - t)) > tolerance * scale * 10:
                return False
    return True


def holonomy_of(transporters: Sequence[Transporter]) -> RealMatrix4:
    h = np.eye(4)
    for t in transporters:
        h = t.U @ h
    return h


def twist_from_links(
    links: Sequence[CorrelationMatrix],
    loop: Sequence[int],
    method: str = "sqrt",
    side: str = "left",
    cross_check: bool = False,
    tolerance: Optional[float] = None,
    rank_tolerance: Optional[float] = None,
) -> TwistReport:
    """`tolerance` overrides the method tolerance of every link; None keeps the configured one."""
    transporters = [
        transporter(c, method=method, side=side, tolerance=tolerance, rank_tolerance=rank_tolerance) for c in links
    ]
    h = holonomy_of(transporters)
    xi = 0.25 * float(np.trace(h))
    xi_reversed = 0.25 * float(np.trace(ETA @ h.T @ ETA))
    values = np.linalg.eigvals(h)
    lorentz = is_lorentz_spectrum(values)

    route_gap = None
    notes: List[str] = []
    if cross_check and method != "eigen":
        try:
            others = [transporter(c, method="eigen", side=side, rank_tolerance=rank_tolerance) for c in links]
            route_gap = max(float(np.max(np.abs(a.U - b.U))) for a, b in zip(transporters, others))
        except DefectiveLink as e:
            notes.append(f"eigen route unavailable on link {list(e.link) if e.link else None}")
    if not lorentz:
        notes.append("holonomy spectrum is not closed under inversion")
    for t in transporters:
        spatial = np.asarray(t.sigma[1:], dtype=float)
        gaps = np.abs(np.diff(np.abs(spatial)))
        if np.min(gaps) <= DEGENERACY_TOLERANCE * abs(float(t.sigma[0])) and np.any(spatial > 0.0):
            # Degenerate and not of singlet signature: the transporter is one of a family.
            notes.append(f"degenerate spatial values on link {list(t.pair) if t.pair else None}; transporter is not unique")

    logger.debug("Twist computed", loop=list(loop), xi=xi, method=method, side=side)
    return TwistReport(
        loop=tuple(loop),
        holonomy=h,
        xi=xi,
        xi_reversed=xi_reversed,
        eigenvalues=values,
        links=transporters,
        method=method,
        side=side,
        lorentz_spectrum=lorentz,
        route_gap=route_gap,
        notes=notes,
    )


def twist(
    rho: DensityMatrix,
    loop: Sequence[int],
    method: str = "sqrt",
    side: str = "left",
    cross_check: bool = False,
    tolerance: Optional[float] = None,
    rank_tolerance: Optional[float] = None,
) -> TwistReport:
    loop = _validate_loop(loop, rho.n_qubits)
    links = loop_links(rho, loop)
    return twist_from_links(
        links, loop, method=method, side=side, cross_check=cross_check, tolerance=tolerance, rank_tolerance=rank_tolerance
    )


# Gauge transformations

GaugeOp = Union[LorentzMatrix, LocalOp]


def _as_lorentz(op: GaugeOp) -> LorentzMatrix:
    if isinstance(op, LorentzMatrix):
        return op
    if isinstance(op, LocalOp):
        return sl2_to_lorentz(op)
    raise GroupElementError("Gauge operations must be Lorentz matrices or unimodular local operations")


@dataclass(frozen=True)
class GaugeResult:
    links: List[CorrelationMatrix]
    applied: Dict[int, RealMatrix4]


def gauge_transform(links: Sequence[CorrelationMatrix], ops: Mapping[int, GaugeOp]) -> GaugeResult:
    """S(b,a) -> U_b S(b,a) U_a^T for every link; qubits without an op are left alone."""
    lorentz = {int(q): _as_lorentz(op).U for q, op in ops.items()}
    out = []
    for corr in links:
        if corr.pair is None:
            raise InvalidStateError("Gauge transformations need labelled links")
        b, a = corr.pair
        out.append(corr.transformed(lorentz.get(b, np.eye(4)), lorentz.get(a, np.eye(4))))
    return GaugeResult(out, lorentz)
