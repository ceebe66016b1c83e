import structlog
from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from loopgauge.config import get_settings

logger = structlog.get_logger()

DATABASE_URL = get_settings().database_url

# SQLite connections are handed across FastAPI worker threads
_connect_args = {"check_same_thread": False} if DATABASE_URL.startswith("sqlite") else {}
engine = create_engine(DATABASE_URL, echo=False, connect_args=_connect_args)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


def get_db():
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def init_db(bind=None):
    """Creates the run archive tables."""
    try:
        Base.metadata.create_all(bind=bind or engine)
        logger.info("Database tables created successfully")
    except Exception as e:
        logger.error("Database initialization failed", error=str(e))
        raise e
