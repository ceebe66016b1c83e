import numpy as np
import pytest
import structlog
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from loopgauge.config import get_settings
from loopgauge.db.database import Base, get_db
from loopgauge.services.quantum.states import random_local_op, random_state


@pytest.fixture(autouse=True)
def fresh_configuration():
    yield
    structlog.reset_defaults()
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def two_qubit_states(rng):
    return [random_state(2, rng) for _ in range(25)]


@pytest.fixture
def three_qubit_states(rng):
    return [random_state(3, rng) for _ in range(8)]


@pytest.fixture
def local_ops(rng):
    return [random_local_op(rng) for _ in range(25)]


@pytest.fixture
def db_session():
    engine = create_engine(
        "sqlite://",
        connect_args={"check_same_thread": False},
        poolclass=StaticPool,
    )
    Base.metadata.create_all(bind=engine)
    Session = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    db = Session()
    try:
        yield db
    finally:
        db.close()


@pytest.fixture
def client(db_session):
    from fastapi.testclient import TestClient

    from loopgauge.main import app

    def override_get_db():
        yield db_session

    app.dependency_overrides[get_db] = override_get_db
    try:
        yield TestClient(app)
    finally:
        app.dependency_overrides.clear()
