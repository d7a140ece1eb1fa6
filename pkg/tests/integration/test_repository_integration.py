import io

import pytest

from src.commands.cli import EXIT_OK, run
from src.database.connection import DatabaseManager
from src.models.simulation import RunManifest
from src.repositories.run_repo import RunRepository


class TestRepositoryIntegration:
    """Integration tests for the run archive with a real database"""

    def test_run_repository_crud_operations(self, db_session):
        """Test complete CRUD operations for the run repository"""
        repo = RunRepository(db_session)

        # Create
        manifest = RunManifest(command="simulate", tool_version="1.0.0", seed=11, config={"gamma": 2.0})
        created = repo.record(manifest, [{"gamma": 2.0, "ser_mc": 0.02}])
        assert created.id is not None

        # Read
        retrieved = repo.get_by_id(created.id)
        assert retrieved is not None
        assert retrieved.command == "simulate"
        assert repo.rows_of(created.id) == [{"gamma": 2.0, "ser_mc": 0.02}]

        # Query operations
        assert len(repo.find_by_command("simulate")) == 1
        assert repo.find_by_command("design") == []
        assert repo.list_all()[0].id == created.id

        # Delete
        assert repo.delete(created.id) is True
        assert repo.get_by_id(created.id) is None

    def test_database_manager_lifecycle(self, tmp_path):
        """Test a file-backed archive is created on first use and reopened later"""
        url = f"sqlite:///{tmp_path / 'nested' / 'runs.db'}"

        manager = DatabaseManager(url)
        manager.initialize()
        session = manager.get_session()
        RunRepository(session).record(RunManifest(command="design", tool_version="1.0.0"), [])
        session.close()
        manager.close()

        reopened = DatabaseManager(url)
        reopened.initialize()
        session = reopened.get_session()
        assert RunRepository(session).count() == 1
        session.close()
        reopened.close()

    def test_uninitialized_manager(self):
        """Test sessions require initialize()"""
        with pytest.raises(RuntimeError, match="not initialized"):
            DatabaseManager("sqlite://").get_session()

    def test_cli_archives_runs(self, tmp_path):
        """Test --archive stores the manifest and result rows of a run"""
        # Arrange
        url = f"sqlite:///{tmp_path / 'runs.db'}"
        argv = ["--out", str(tmp_path), "--archive", url,
                "ser-bound", "--mrx", "3", "--gamma-grid", "1,2", "--sigma-mode", "white"]

        # Act
        code = run(argv, io.StringIO())

        # Assert
        assert code == EXIT_OK
        manager = DatabaseManager(url)
        manager.initialize()
        session = manager.get_session()
        repo = RunRepository(session)
        run_model = repo.latest()
        assert run_model.command == "ser-bound"
        assert [row["gamma"] for row in repo.rows_of(run_model.id)] == [1.0, 2.0]
        assert repo.manifest_of(run_model.id).config["sigma_mode"] == "white"
        session.close()
        manager.close()
