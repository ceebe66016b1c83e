"""
Sequential untwisting: walk the loop, straighten each link with a local
filter on its far qubit, and see what is left on the closing link.

Link matrices are followed in the gauge frame, S(b,a) -> U_b S U_a^T, so a
straightened link stays symmetric whatever later filters do. The filtered
state is carried alongside for the Kraus operators and their weights only:
on mixed states a filter on one qubit also reshapes the marginals of links
that do not touch it.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from loopgauge.errors import AnnihilatingStep, InvalidStateError, KernelError
from loopgauge.services.quantum.correlation import ETA, CorrelationMatrix, LorentzMatrix, lorentz_to_sl2
from loopgauge.services.quantum.qlinalg import ComplexMatrix, RealMatrix4
from loopgauge.services.quantum.states import DensityMatrix, LocalOp, apply_local
from loopgauge.services.twist.holonomy import (
    _validate_loop,
    gauge_transform,
    loop_links,
    loop_pairs,
    transporter,
    twist,
)

logger = structlog.get_logger()

ANNIHILATION_WEIGHT = 1e-14
PROTOCOL_SYMMETRY_TOLERANCE = 1e-6
MISMATCH_TOLERANCE = 1e-7


@dataclass(frozen=True)
class ProtocolStep:
    step: int
    qubit: int
    lorentz: RealMatrix4
    operator: ComplexMatrix
    weight: float
    symmetric_links: List[Tuple[int, int]]


@dataclass(frozen=True)
class ProtocolTrace:
    loop: Tuple[int, ...]
    steps: List[ProtocolStep]
    holonomy: RealMatrix4
    mismatch: RealMatrix4
    mismatch_eigenvalues: np.ndarray
    mismatch_gap: float
    total_weight: float
    state: DensityMatrix


def kraus_filter(lorentz: LorentzMatrix) -> ComplexMatrix:
    """SL(2,C) preimage scaled so its largest singular value is one."""
    a = lorentz_to_sl2(lorentz).matrix
    return a / np.linalg.norm(a, 2)


def _asymmetry(corr: CorrelationMatrix) -> float:
    s = corr.S
    return float(np.max(np.abs(s - s.T)) / np.max(np.abs(s)))


def _apply(rho: DensityMatrix, qubit: int, operator: ComplexMatrix, link) -> Tuple[DensityMatrix, float]:
    ops: List[Optional[LocalOp]] = [None] * rho.n_qubits
    ops[qubit] = LocalOp(operator, unimodular=False)
    try:
        outcome = apply_local(rho, ops)
    except InvalidStateError as e:
        raise AnnihilatingStep("Local filter annihilates the state", link=link, **e.details)
    if outcome.weight < ANNIHILATION_WEIGHT:
        raise AnnihilatingStep("Local filter annihilates the state", link=link, weight=outcome.weight)
    return outcome.state, outcome.weight


def untwist_protocol(
    rho: DensityMatrix,
    loop: Sequence[int],
    method: str = "sqrt",
    tolerance: Optional[float] = None,
    rank_tolerance: Optional[float] = None,
) -> ProtocolTrace:
    """Filter q1, ..., q_{n-1} and finally q0; the closing link then carries the holonomy.

    Step k < n straightens link (q_k, q_{k-1}); the last step acts on q0 with
    the inverse holonomy and leaves every link but (q1, q0) symmetric.
    """
    loop = _validate_loop(loop, rho.n_qubits)
    report = twist(rho, loop, method=method, tolerance=tolerance, rank_tolerance=rank_tolerance)
    pairs = loop_pairs(loop)
    links = loop_links(rho, loop)
    n = len(loop)

    steps: List[ProtocolStep] = []
    state = rho
    transported = np.eye(4)
    total = 1.0
    for k in range(1, n + 1):
        qubit = loop[k % n]
        if k < n:
            transported = report.links[k - 1].U @ transported
            target = ETA @ transported.T @ ETA
        else:
            target = ETA @ report.holonomy.T @ ETA
        lorentz = LorentzMatrix(target)
        operator = kraus_filter(lorentz)
        state, weight = _apply(state, qubit, operator, pairs[(k - 1) % n])
        total *= weight
        links = gauge_transform(links, {qubit: lorentz}).links

        done = pairs[:k] if k < n else pairs[1:]
        for corr in links:
            if corr.pair in done and _asymmetry(corr) > PROTOCOL_SYMMETRY_TOLERANCE:
                raise KernelError(
                    "Protocol step left a link unsymmetrized",
                    link=list(corr.pair),
                    step=k,
                    asymmetry=_asymmetry(corr),
                )
        steps.append(ProtocolStep(k, qubit, lorentz.U, operator, weight, list(done)))
        logger.debug("Protocol step", step=k, qubit=qubit, weight=weight)

    mismatch = transporter(links[0], method=method, tolerance=tolerance, rank_tolerance=rank_tolerance).U
    scale = max(1.0, float(np.max(np.abs(report.holonomy))))
    gap = float(np.max(np.abs(mismatch - report.holonomy))) / scale
    if gap > MISMATCH_TOLERANCE:
        raise KernelError("Protocol mismatch differs from the holonomy", gap=gap, loop=list(loop))

    return ProtocolTrace(
        loop=loop,
        steps=steps,
        holonomy=report.holonomy,
        mismatch=mismatch,
        mismatch_eigenvalues=np.linalg.eigvals(mismatch),
        mismatch_gap=gap,
        total_weight=total,
        state=state,
    )
