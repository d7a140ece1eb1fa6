from pathlib import Path
from typing import Optional
from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import StaticPool
from ..config.settings import get_settings
from ..config.logging import get_logger
from .models import Base

logger = get_logger(__name__)


class DatabaseManager:
    """Manages the run-archive connection and session lifecycle"""

    def __init__(self, database_url: Optional[str] = None):
        self.database_url = database_url or get_settings().output.archive_url
        self.engine = None
        self.session_factory = None

    def initialize(self) -> None:
        """Open the archive and create missing tables"""
        if not self.database_url:
            raise RuntimeError("No archive URL configured")

        logger.info("Initializing run archive", database_url=self.database_url)

        # Ensure database directory exists for file-backed SQLite
        if self.database_url.startswith("sqlite:///") and ":memory:" not in self.database_url:
            db_path = self.database_url.replace("sqlite:///", "")
            Path(db_path).parent.mkdir(parents=True, exist_ok=True)

        in_memory = ":memory:" in self.database_url or self.database_url == "sqlite://"
        self.engine = create_engine(
            self.database_url,
            poolclass=StaticPool if in_memory else None,
            connect_args={"check_same_thread": False} if "sqlite" in self.database_url else {},
            echo=False
        )

        self.session_factory = sessionmaker(bind=self.engine, class_=Session, expire_on_commit=False)
        Base.metadata.create_all(self.engine)

        logger.info("Run archive ready")

    def get_session(self) -> Session:
        """Get a database session"""
        if not self.session_factory:
            raise RuntimeError("Database not initialized. Call initialize() first.")
        return self.session_factory()

    def close(self) -> None:
        """Close database connection"""
        if self.engine:
            self.engine.dispose()
            logger.info("Run archive closed")
