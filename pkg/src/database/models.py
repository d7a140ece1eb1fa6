from datetime import datetime, timezone
from sqlalchemy import Column, Integer, String, Text, DateTime, ForeignKey, BigInteger
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class RunModel(Base):
    __tablename__ = 'runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    command = Column(String(32), nullable=False, index=True)
    tool_version = Column(String(32), nullable=False)
    seed = Column(BigInteger, nullable=True)
    config_json = Column(Text, nullable=False)
    outputs_json = Column(Text, nullable=False, default="[]")
    started_at = Column(DateTime, nullable=False, default=_utcnow)
    finished_at = Column(DateTime, nullable=True)

    # Relationships
    rows = relationship(
        "ResultRowModel",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="ResultRowModel.point_index"
    )

    def __repr__(self) -> str:
        return f"<RunModel(id={self.id}, command={self.command}, seed={self.seed})>"


class ResultRowModel(Base):
    __tablename__ = 'result_rows'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('runs.id'), nullable=False, index=True)
    point_index = Column(Integer, nullable=False)
    payload_json = Column(Text, nullable=False)

    # Relationships
    run = relationship("RunModel", back_populates="rows")

    def __repr__(self) -> str:
        return f"<ResultRowModel(id={self.id}, run_id={self.run_id}, point_index={self.point_index})>"
