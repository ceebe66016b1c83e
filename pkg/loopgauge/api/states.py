from typing import Optional, Tuple

from fastapi import APIRouter
from pydantic import BaseModel

from loopgauge.api.errors import http_error
from loopgauge.errors import LoopGaugeError
from loopgauge.schemas import CorrelationReport, StateFile
from loopgauge.services.quantum.correlation import corr_matrix
from loopgauge.services.quantum.states import CATALOG_NAMES, marginal, state_from_payload
from loopgauge.services.twist.lsvd import classify_link

router = APIRouter(prefix="/states", tags=["States"])


class CorrRequest(BaseModel):
    state: StateFile
    pair: Tuple[int, int] = (0, 1)


@router.get("/catalog")
def list_catalog():
    return {"names": list(CATALOG_NAMES)}


@router.post("/corr", response_model=CorrelationReport)
def correlation(req: CorrRequest):
    try:
        rho = state_from_payload(req.state.payload())
        corr = corr_matrix(marginal(rho, req.pair), req.pair)
        params: Optional[dict] = req.state.params if req.state.catalog == "rank3_family" else None
        return CorrelationReport.build(corr, classify_link(corr, params=params))
    except LoopGaugeError as e:
        raise http_error(e)
