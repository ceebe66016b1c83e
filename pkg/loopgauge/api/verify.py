from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Query as QueryParam
from pydantic import BaseModel, Field
from sqlalchemy.orm import Session

from loopgauge.api.errors import http_error
from loopgauge.db.database import get_db
from loopgauge.errors import LoopGaugeError
from loopgauge.schemas import ClaimResultModel
from loopgauge.services.paperlab.archive import VerificationService
from loopgauge.services.paperlab.catalog import CLAIMS, verify_catalog

router = APIRouter(prefix="/verify", tags=["Verify"])


class VerifyQuery(BaseModel):
    claims: List[str] = Field(default_factory=list)
    seed: int = 7
    samples: Optional[int] = None


@router.get("/claims")
def list_claims():
    return [{"claim_id": c.claim_id, "statement": c.statement, "provenance": c.provenance, "tolerance": c.tolerance} for c in CLAIMS.values()]


@router.post("")
def run_verification(req: VerifyQuery, archive: bool = QueryParam(False), db: Session = Depends(get_db)):
    try:
        if archive:
            run, results = VerificationService(db).run(req.claims or None, seed=req.seed, samples=req.samples)
            run_id = run.id
        else:
            results = verify_catalog(req.claims or None, seed=req.seed, samples=req.samples)
            run_id = None
    except LoopGaugeError as e:
        raise http_error(e)
    return {
        "run_id": run_id,
        "passed": all(r.passed for r in results),
        "claims": [ClaimResultModel.build(r).model_dump(mode="json") for r in results],
    }


@router.get("/runs/{id}")
def get_run(id: int, db: Session = Depends(get_db)):
    run = VerificationService(db).get(id)
    if not run:
        raise HTTPException(status_code=404, detail="Verification run not found")

    return {
        "id": run.id,
        "seed": run.seed,
        "selection": run.selection,
        "passed": run.passed,
        "claims": [
            {"claim_id": c.claim_id, "passed": c.passed, "computed": c.computed, "tolerance": c.tolerance, "detail": c.detail}
            for c in run.claims
        ],
    }
