import pytest
import numpy as np
from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import StaticPool

from src.config.settings import BoundConfig, SolverConfig, reset_settings
from src.database.models import Base
from src.factories.system_factory import SystemFactory
from src.models.zx import ZxAlphabet
from src.services.bound_service import BoundService
from src.services.modulation_service import ModulationService
from src.services.mvn_service import MvnService
from src.services.precoding_service import PrecodingService
from src.services.qp_service import QpService
from src.services.waveform_service import WaveformService


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from the file defaults without stray ZXQOS_ variables"""
    import os
    for key in list(os.environ):
        if key.upper().startswith("ZXQOS_"):
            monkeypatch.delenv(key)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def test_database():
    """Create a test database for each test"""
    # Use in-memory SQLite for fast testing
    engine = create_engine(
        "sqlite:///:memory:",
        poolclass=StaticPool,
        connect_args={"check_same_thread": False},
        echo=False
    )
    Base.metadata.create_all(engine)

    session_factory = sessionmaker(bind=engine, class_=Session, expire_on_commit=False)
    yield session_factory

    engine.dispose()


@pytest.fixture
def db_session(test_database):
    """Create a database session for each test"""
    session = test_database()
    yield session
    session.rollback()
    session.close()


@pytest.fixture
def rng():
    """Seeded generator for reproducible random instances"""
    return np.random.default_rng(12345)


@pytest.fixture
def waveform_service():
    return WaveformService()


@pytest.fixture
def system_factory(waveform_service):
    return SystemFactory(waveform_service)


@pytest.fixture
def modulation_service():
    return ModulationService()


@pytest.fixture
def qp_service():
    return QpService(SolverConfig())


@pytest.fixture
def precoding_service(qp_service):
    return PrecodingService(qp_service)


@pytest.fixture(scope="session")
def bound_config():
    return BoundConfig()


@pytest.fixture(scope="session")
def shared_mvn_service(bound_config):
    """One MVN service per session so QMC point sets are built once"""
    return MvnService(bound_config)


@pytest.fixture
def bound_service(shared_mvn_service, bound_config):
    return BoundService(ModulationService(), shared_mvn_service, bound_config)


@pytest.fixture
def alphabet_m3():
    return ZxAlphabet(3)


@pytest.fixture
def alphabet_m2():
    return ZxAlphabet(2)


@pytest.fixture
def siso_system(system_factory):
    """SISO system with M_Rx = M_Tx = 3 and N = 4"""
    dims = system_factory.create_dims(n_symbols=4, m_rx=3)
    return system_factory.create_system(dims)
