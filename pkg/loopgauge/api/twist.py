from typing import List, Tuple

from fastapi import APIRouter
from pydantic import BaseModel

from loopgauge.api.errors import http_error
from loopgauge.errors import LoopGaugeError
from loopgauge.schemas import DecompositionReport, LinkReport, ProtocolReportModel, StateFile, TwistReportModel
from loopgauge.services.quantum.correlation import corr_matrix
from loopgauge.services.quantum.states import marginal, state_from_payload
from loopgauge.services.twist.holonomy import transporter, twist
from loopgauge.services.twist.lsvd import lorentz_svd
from loopgauge.services.twist.protocol import untwist_protocol

router = APIRouter(prefix="/twist", tags=["Twist"])


class LinkQuery(BaseModel):
    state: StateFile
    pair: Tuple[int, int] = (0, 1)
    method: str = "sqrt"
    side: str = "left"


class LoopQuery(BaseModel):
    state: StateFile
    loop: List[int]
    method: str = "sqrt"
    side: str = "left"
    cross_check: bool = False


def _link(query: LinkQuery):
    rho = state_from_payload(query.state.payload())
    return corr_matrix(marginal(rho, query.pair), query.pair)


@router.post("/lsvd", response_model=DecompositionReport)
def decompose(query: LinkQuery):
    method = "eigen" if query.method == "sqrt" else query.method
    try:
        corr = _link(query)
        return DecompositionReport.build(lorentz_svd(corr, method=method), corr.pair)
    except LoopGaugeError as e:
        raise http_error(e)


@router.post("/transporter", response_model=LinkReport)
def link_transporter(query: LinkQuery):
    try:
        return LinkReport.build(transporter(_link(query), method=query.method, side=query.side))
    except LoopGaugeError as e:
        raise http_error(e)


@router.post("/loop", response_model=TwistReportModel)
def loop_twist(query: LoopQuery):
    try:
        rho = state_from_payload(query.state.payload())
        return TwistReportModel.build(twist(rho, query.loop, method=query.method, side=query.side, cross_check=query.cross_check))
    except LoopGaugeError as e:
        raise http_error(e)


@router.post("/protocol", response_model=ProtocolReportModel)
def protocol(query: LoopQuery):
    try:
        rho = state_from_payload(query.state.payload())
        return ProtocolReportModel.build(untwist_protocol(rho, query.loop, method=query.method))
    except LoopGaugeError as e:
        raise http_error(e)
