from typing import List, Optional, Sequence, Tuple

import structlog
from sqlalchemy.orm import Session

from loopgauge.db.models import ClaimRecord, VerificationRun
from loopgauge.schemas import jsonable
from loopgauge.services.paperlab.catalog import ClaimResult, verify_catalog

logger = structlog.get_logger()


class VerificationService:
    """Runs the claim catalog and keeps the outcome in the run archive."""

    def __init__(self, db: Session):
        self.db = db

    def run(
        self,
        selection: Optional[Sequence[str]] = None,
        seed: int = 7,
        samples: Optional[int] = None,
        threads: int = 1,
    ) -> Tuple[VerificationRun, List[ClaimResult]]:
        results = verify_catalog(selection, seed=seed, samples=samples, threads=threads)
        return self.archive(results, selection, seed), results

    def archive(self, results: Sequence[ClaimResult], selection: Optional[Sequence[str]], seed: int) -> VerificationRun:
        run = VerificationRun(
            seed=seed,
            selection=list(selection or []),
            passed=all(r.passed for r in results),
        )
        for r in results:
            run.claims.append(
                ClaimRecord(
                    claim_id=r.claim_id,
                    statement=r.statement,
                    expected=jsonable(r.expected),
                    computed=jsonable(r.computed),
                    tolerance=r.tolerance,
                    passed=r.passed,
                    runtime_ms=r.runtime_ms,
                    detail=jsonable(r.detail),
                )
            )
        self.db.add(run)
        self.db.commit()
        self.db.refresh(run)
        logger.info("Verification run archived", run_id=run.id, passed=run.passed, claims=len(results))
        return run

    def get(self, run_id: int) -> Optional[VerificationRun]:
        return self.db.query(VerificationRun).filter(VerificationRun.id == run_id).first()
