from sqlalchemy import JSON, Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship
from sqlalchemy.sql import func

from loopgauge.db.database import Base


class VerificationRun(Base):
    __tablename__ = "verification_runs"

    id = Column(Integer, primary_key=True, index=True)
    seed = Column(Integer)
    selection = Column(JSON, default=[])  # claim ids, empty means all
    passed = Column(Boolean, index=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    claims = relationship("ClaimRecord", back_populates="run", cascade="all, delete-orphan", order_by="ClaimRecord.id")


class ClaimRecord(Base):
    __tablename__ = "claim_records"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("verification_runs.id"))
    claim_id = Column(String, index=True)
    statement = Column(Text)
    expected = Column(Float, nullable=True)
    computed = Column(Float, nullable=True)
    tolerance = Column(Float)
    passed = Column(Boolean)
    runtime_ms = Column(Float)
    detail = Column(JSON, default={})

    run = relationship("VerificationRun", back_populates="claims")
