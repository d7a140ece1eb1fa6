import io
import json

import pytest
from src.commands.cli import build_parser
from src.commands.experiment_commands import ExperimentCommands, load_experiment_file
from src.config.settings import get_settings
from src.models.enums import SweepParameter
from src.models.errors import ConfigurationError
from src.models.simulation import RESULT_COLUMNS, RunManifest


@pytest.fixture
def parser():
    return build_parser()


@pytest.fixture
def commands():
    return ExperimentCommands.from_settings(get_settings(), io.StringIO())


@pytest.fixture
def mocked_commands(mocker):
    """Commands with a mocked simulator"""
    simulation = mocker.Mock()
    return ExperimentCommands(
        get_settings(), simulation, mocker.Mock(), mocker.Mock(), mocker.Mock(), mocker.Mock(), io.StringIO()
    )


def result_row(**values):
    row = {column: None for column in RESULT_COLUMNS}
    row.update(values)
    return row


class TestExperimentFiles:
    """Test cases for experiment config files"""

    def test_toml(self, tmp_path):
        """Test TOML files load as flat tables"""
        path = tmp_path / "exp.toml"
        path.write_text('m_rx = 2\nn_symbols = 4\ngamma = 2.5\nsigma_mode = "white"\n')
        assert load_experiment_file(path) == {"m_rx": 2, "n_symbols": 4, "gamma": 2.5, "sigma_mode": "white"}

    def test_json(self, tmp_path):
        """Test JSON files load as flat tables"""
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"trials": 50}))
        assert load_experiment_file(path) == {"trials": 50}

    @pytest.mark.parametrize("name,content,match", [
        ("exp.yaml", "trials: 5", "must end in"),
        ("exp.toml", "trials = ", "exp.toml"),
        ("exp.json", "[1, 2]", "top level"),
    ])
    def test_invalid_files(self, tmp_path, name, content, match):
        """Test unsupported or malformed files raise ConfigurationError"""
        path = tmp_path / name
        path.write_text(content)
        with pytest.raises(ConfigurationError, match=match):
            load_experiment_file(path)

    def test_missing_file(self, tmp_path):
        """Test a missing file is reported"""
        with pytest.raises(ConfigurationError, match="does not exist"):
            load_experiment_file(tmp_path / "nope.toml")


class TestBuildSimConfig:
    """Test cases for layering settings, files and flags"""

    def test_settings_defaults(self, commands, parser):
        """Test unset flags fall back to the settings"""
        config, options = commands.build_sim_config(parser.parse_args(["simulate", "--gamma", "2"]))
        assert config.gamma == 2.0
        assert config.trials == 10000
        assert config.seed == 7
        assert options == {}

    def test_flags_override_file(self, commands, parser, tmp_path):
        """Test command-line flags win over the experiment file"""
        # Arrange
        path = tmp_path / "exp.toml"
        path.write_text("m_rx = 2\nn_symbols = 4\ntrials = 50\ngamma = 3.0\n")
        args = parser.parse_args(["simulate", "--config", str(path), "--trials", "20"])

        # Act
        config, _ = commands.build_sim_config(args)

        # Assert
        assert config.trials == 20
        assert config.m_rx == 2
        assert config.gamma == 3.0

    def test_grid_replaces_file_threshold(self, commands, parser, tmp_path):
        """Test a gamma grid on the command line replaces a gamma from the file"""
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"gamma": 3.0}))
        args = parser.parse_args(["simulate", "--config", str(path), "--gamma-grid", "1:1:3"])

        config, _ = commands.build_sim_config(args)

        assert config.gamma is None
        assert config.sweep_parameter == SweepParameter.GAMMA
        assert config.sweep_values == [1.0, 2.0, 3.0]

    def test_cdf_options(self, commands, parser):
        """Test --cdf records the channel count as a run option"""
        args = parser.parse_args(["simulate", "--gamma", "2", "--ntx", "2", "--cdf", "--channels", "60"])
        _, options = commands.build_sim_config(args)
        assert options == {"cdf_channels": 60}

    def test_invalid_config_names_field(self, commands, parser):
        """Test validation failures become ConfigurationError with the field path"""
        args = parser.parse_args(["simulate", "--gamma", "2", "--trials", "0"])
        with pytest.raises(ConfigurationError, match="Invalid experiment config: trials"):
            commands.build_sim_config(args)

    def test_manifest_from_other_command(self, commands, parser, tmp_path):
        """Test replaying a manifest of another sub-command is refused"""
        path = RunManifest(command="design", tool_version="1.0.0").save(tmp_path / "m.json")
        args = parser.parse_args(["simulate", "--from-manifest", str(path)])
        with pytest.raises(ConfigurationError, match="'design'"):
            commands.build_sim_config(args)


class TestCmdSimulate:
    """Test cases for the simulate handler with a mocked simulator"""

    def test_single_point(self, mocked_commands, parser, tmp_path):
        """Test one point writes the CSV and the manifest"""
        # Arrange
        result = mocked_commands.simulation_service.monte_carlo.return_value
        result.to_row.return_value = result_row(gamma=2.0, ser_mc=0.01)
        args = parser.parse_args(["--out", str(tmp_path), "simulate", "--gamma", "2"])

        # Act
        code = mocked_commands.cmd_simulate(args)

        # Assert
        assert code == 0
        lines = (tmp_path / "simulate.csv").read_text().splitlines()
        assert lines[0] == ",".join(RESULT_COLUMNS)
        assert lines[1].startswith("2.0,0.01,")
        manifest = RunManifest.load(tmp_path / "simulate.manifest.json")
        assert manifest.command == "simulate"
        assert manifest.config["gamma"] == 2.0
        assert manifest.outputs == [str(tmp_path / "simulate.csv")]

    def test_sweep_with_only_failures(self, mocked_commands, parser, tmp_path, mocker):
        """Test a sweep where every point failed exits with 1"""
        failed = mocker.Mock(ok=False)
        failed.to_row.return_value = result_row(gamma=0.0, error="no margin")
        mocked_commands.simulation_service.sweep.return_value = [failed]
        args = parser.parse_args(["--out", str(tmp_path), "simulate", "--gamma-grid", "0"])

        assert mocked_commands.cmd_simulate(args) == 1
        assert "no margin" in (tmp_path / "simulate.csv").read_text()

    def test_partial_sweep_succeeds(self, mocked_commands, parser, tmp_path, mocker):
        """Test a sweep with at least one good point exits with 0"""
        good = mocker.Mock(ok=True)
        good.to_row.return_value = result_row(gamma=2.0, ser_mc=0.01)
        bad = mocker.Mock(ok=False)
        bad.to_row.return_value = result_row(gamma=0.0, error="no margin")
        mocked_commands.simulation_service.sweep.return_value = [bad, good]
        args = parser.parse_args(["--out", str(tmp_path), "simulate", "--gamma-grid", "0,2"])

        assert mocked_commands.cmd_simulate(args) == 0
        assert len((tmp_path / "simulate.csv").read_text().splitlines()) == 3
