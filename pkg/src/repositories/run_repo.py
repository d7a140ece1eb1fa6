import json
from typing import Any, Dict, List, Optional
from sqlalchemy.orm import Session
from sqlalchemy import select
from .base import BaseRepository
from ..database.models import ResultRowModel, RunModel
from ..models.simulation import RunManifest


class RunRepository(BaseRepository[RunModel]):
    """Repository for archived experiment runs and their result rows"""

    def __init__(self, session: Session):
        super().__init__(session, RunModel)

    def record(self, manifest: RunManifest, rows: List[Dict[str, Any]]) -> RunModel:
        """Store a manifest together with its result rows"""
        run = RunModel(
            command=manifest.command,
            tool_version=manifest.tool_version,
            seed=manifest.seed,
            config_json=json.dumps(
                {"config": manifest.config, "options": manifest.options}, sort_keys=True, default=str
            ),
            outputs_json=json.dumps(manifest.outputs),
            started_at=manifest.started_at,
            finished_at=manifest.finished_at
        )
        run.rows = [
            ResultRowModel(point_index=i, payload_json=json.dumps(row, sort_keys=True, default=str))
            for i, row in enumerate(rows)
        ]
        return self.create(run)

    def find_by_command(self, command: str) -> List[RunModel]:
        """Find all runs of one sub-command, oldest first"""
        result = self.session.execute(
            select(RunModel).where(RunModel.command == command).order_by(RunModel.id)
        )
        return list(result.scalars().all())

    def find_by_seed(self, seed: int) -> List[RunModel]:
        result = self.session.execute(select(RunModel).where(RunModel.seed == seed))
        return list(result.scalars().all())

    def latest(self) -> Optional[RunModel]:
        result = self.session.execute(select(RunModel).order_by(RunModel.id.desc()).limit(1))
        return result.scalars().first()

    def rows_of(self, run_id: int) -> List[Dict[str, Any]]:
        """Decoded result rows of one run, in point order"""
        result = self.session.execute(
            select(ResultRowModel)
            .where(ResultRowModel.run_id == run_id)
            .order_by(ResultRowModel.point_index)
        )
        return [json.loads(row.payload_json) for row in result.scalars().all()]

    def manifest_of(self, run_id: int) -> Optional[RunManifest]:
        run = self.get_by_id(run_id)
        if run is None:
            return None
        snapshot = json.loads(run.config_json)
        return RunManifest(
            command=run.command,
            tool_version=run.tool_version,
            seed=run.seed,
            config=snapshot["config"],
            options=snapshot["options"],
            started_at=run.started_at,
            finished_at=run.finished_at,
            outputs=json.loads(run.outputs_json)
        )
