"""
pydantic models for every JSON document the CLI writes and the HTTP API
returns. Complex numbers travel as [re, im] pairs; floats use Python's
shortest round-trip repr.
"""

import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from loopgauge.services.paperlab.catalog import ClaimResult
from loopgauge.services.paperlab.sweep import SweepPoint, SweepResult
from loopgauge.services.quantum.correlation import CorrelationMatrix, concurrence_from_sigma
from loopgauge.services.twist.holonomy import Transporter, TwistReport
from loopgauge.services.twist.lsvd import LinkClass, LorentzSvd
from loopgauge.services.twist.protocol import ProtocolStep, ProtocolTrace

Matrix = List[List[float]]
Complex = Tuple[float, float]


def jsonable(value: Any) -> Any:
    """numpy containers and scalars to plain JSON values; NaN becomes None."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) else value
    return value


def _matrix(m: np.ndarray) -> Matrix:
    return [[float(v) for v in row] for row in np.asarray(m, dtype=float)]


def _complex_list(values) -> List[Complex]:
    return [(float(v.real), float(v.imag)) for v in np.asarray(values, dtype=complex)]


def _complex_matrix(m: np.ndarray) -> List[List[Complex]]:
    return [_complex_list(row) for row in np.asarray(m, dtype=complex)]


# Inputs

class StateFile(BaseModel):
    """Either an explicit density matrix or a catalog entry."""

    n_qubits: Optional[int] = None
    matrix: Optional[List[List[Complex]]] = None
    catalog: Optional[str] = None
    params: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.matrix is None) == (self.catalog is None):
            raise ValueError("give exactly one of 'matrix' or 'catalog'")
        return self

    def payload(self) -> dict:
        return self.model_dump(exclude_none=True)


# Reports

class CorrelationReport(BaseModel):
    pair: Optional[Tuple[int, int]] = None
    S: Matrix
    det: float
    rank: int
    det_sign: Optional[int] = None
    degenerate: Optional[bool] = None
    region: Optional[str] = None

    @classmethod
    def build(cls, corr: CorrelationMatrix, link_class: Optional[LinkClass] = None) -> "CorrelationReport":
        extra = {}
        if link_class is not None:
            extra = {"det_sign": link_class.det_sign, "degenerate": link_class.degenerate, "region": link_class.region}
        return cls(pair=corr.pair, S=_matrix(corr.S), det=corr.det, rank=corr.rank(), **extra)


class DecompositionReport(BaseModel):
    pair: Optional[Tuple[int, int]] = None
    method: str
    V: Matrix
    W: Matrix
    sigma: List[float]
    transporter: Matrix
    concurrence: float
    residual: float
    corrections: List[Dict[str, Any]] = Field(default_factory=list)

    @classmethod
    def build(cls, svd: LorentzSvd, pair=None) -> "DecompositionReport":
        return cls(
            pair=pair,
            method=svd.method,
            V=_matrix(svd.V.U),
            W=_matrix(svd.W.U),
            sigma=[float(s) for s in svd.sigma],
            transporter=_matrix(svd.transporter),
            concurrence=concurrence_from_sigma(svd.sigma),
            residual=svd.residual,
            corrections=jsonable(svd.corrections),
        )


class LinkEntry(BaseModel):
    """One link of a twist report: {"pair", "lambda", "sigma"}."""

    model_config = ConfigDict(populate_by_name=True)

    pair: Optional[Tuple[int, int]] = None
    lambda_: Matrix = Field(alias="lambda")
    sigma: List[float]

    @classmethod
    def build(cls, t: Transporter) -> "LinkEntry":
        return cls(pair=t.pair, lambda_=_matrix(t.U), sigma=[float(s) for s in t.sigma])


class LinkReport(LinkEntry):
    method: str
    side: str

    @classmethod
    def build(cls, t: Transporter) -> "LinkReport":
        return cls(pair=t.pair, method=t.method, side=t.side, lambda_=_matrix(t.U), sigma=[float(s) for s in t.sigma])


class TwistReportModel(BaseModel):
    loop: List[int]
    method: str
    side: str
    xi: float
    xi_reversed: float
    holonomy: Matrix
    eigenvalues: List[Complex]
    lorentz_spectrum: bool
    route_gap: Optional[float] = None
    notes: List[str] = Field(default_factory=list)
    links: List[LinkEntry]

    @classmethod
    def build(cls, report: TwistReport) -> "TwistReportModel":
        return cls(
            loop=list(report.loop),
            method=report.method,
            side=report.side,
            xi=report.xi,
            xi_reversed=report.xi_reversed,
            holonomy=_matrix(report.holonomy),
            eigenvalues=_complex_list(report.eigenvalues),
            lorentz_spectrum=report.lorentz_spectrum,
            route_gap=report.route_gap,
            notes=list(report.notes),
            links=[LinkEntry.build(t) for t in report.links],
        )


class ProtocolStepModel(BaseModel):
    step: int
    qubit: int
    lorentz: Matrix
    operator: List[List[Complex]]
    weight: float
    symmetric_links: List[Tuple[int, int]]

    @classmethod
    def build(cls, step: ProtocolStep) -> "ProtocolStepModel":
        return cls(
            step=step.step,
            qubit=step.qubit,
            lorentz=_matrix(step.lorentz),
            operator=_complex_matrix(step.operator),
            weight=step.weight,
            symmetric_links=[tuple(p) for p in step.symmetric_links],
        )


class ProtocolReportModel(BaseModel):
    loop: List[int]
    steps: List[ProtocolStepModel]
    holonomy: Matrix
    mismatch: Matrix
    mismatch_eigenvalues: List[Complex]
    mismatch_gap: float
    total_weight: float

    @classmethod
    def build(cls, trace: ProtocolTrace) -> "ProtocolReportModel":
        return cls(
            loop=list(trace.loop),
            steps=[ProtocolStepModel.build(s) for s in trace.steps],
            holonomy=_matrix(trace.holonomy),
            mismatch=_matrix(trace.mismatch),
            mismatch_eigenvalues=_complex_list(trace.mismatch_eigenvalues),
            mismatch_gap=trace.mismatch_gap,
            total_weight=trace.total_weight,
        )


class ClaimResultModel(BaseModel):
    """Claim outcome; wall-clock time stays out so reports are reproducible."""

    claim_id: str
    statement: str
    provenance: str
    expected: Optional[float] = None
    computed: Optional[float] = None
    tolerance: float
    passed: bool
    detail: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def build(cls, result: ClaimResult) -> "ClaimResultModel":
        return cls(
            claim_id=result.claim_id,
            statement=result.statement,
            provenance=result.provenance,
            expected=jsonable(result.expected),
            computed=jsonable(result.computed),
            tolerance=result.tolerance,
            passed=result.passed,
            detail=jsonable(result.detail),
        )


class SweepPointModel(BaseModel):
    index: int
    params: Dict[str, float]
    xi: Optional[float] = None
    predicted_xi: Optional[float] = None
    gap: Optional[float] = None
    combination: Optional[str] = None
    holonomy_family: Optional[str] = None
    error: Optional[Dict[str, Any]] = None

    @classmethod
    def build(cls, point: SweepPoint) -> "SweepPointModel":
        return cls(
            index=point.index,
            params=point.params,
            xi=point.xi,
            predicted_xi=point.predicted_xi,
            gap=point.gap,
            combination=point.combination,
            holonomy_family=point.holonomy_family,
            error=jsonable(point.error),
        )


class SweepReportModel(BaseModel):
    family: str
    method: str
    worst_gap: Optional[float] = None
    realized: List[str]
    points: List[SweepPointModel]

    @classmethod
    def build(cls, result: SweepResult) -> "SweepReportModel":
        return cls(
            family=result.family,
            method=result.method,
            worst_gap=result.worst_gap,
            realized=result.realized,
            points=[SweepPointModel.build(p) for p in result.points],
        )
