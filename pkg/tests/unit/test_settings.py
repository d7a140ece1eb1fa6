import json

import pytest
from pydantic import ValidationError
from src.config.settings import BoundConfig, Settings, WaveformConfig, get_settings, reset_settings
from src.models.enums import ChannelMode, SigmaMode


class TestSettings:
    """Test cases for layered configuration"""

    def test_file_defaults(self):
        """Test the shipped config file yields the documented defaults"""
        settings = get_settings()
        assert settings.waveform.rolloff_tx == 0.22
        assert settings.bound.sigma_mode == SigmaMode.CORRELATED
        assert settings.bound.randomizations == 8
        assert settings.simulation.seed == 7
        assert settings.simulation.channel_mode == ChannelMode.FIXED
        assert settings.output.archive_url is None

    def test_settings_are_cached(self):
        """Test get_settings returns one instance until reset"""
        first = get_settings()
        assert get_settings() is first
        reset_settings()
        assert get_settings() is not first

    def test_environment_overrides_file(self, monkeypatch):
        """Test ZXQOS_ variables win over the JSON file"""
        # Arrange
        monkeypatch.setenv("ZXQOS_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("ZXQOS_BOUND__QMC_POINTS", "1024")

        # Act
        settings = get_settings()

        # Assert
        assert settings.log_level == "DEBUG"
        assert settings.bound.qmc_points == 1024
        assert settings.bound.randomizations == 8

    def test_custom_config_file(self, tmp_path):
        """Test values from another JSON file"""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"simulation": {"trials": 123}, "waveform": {"pilot": -1}}))

        settings = Settings.load_from_config_file(path)

        assert settings.simulation.trials == 123
        assert settings.waveform.pilot == -1
        assert settings.simulation.batch_size == 2000

    def test_missing_config_file(self, tmp_path):
        """Test a missing file falls back to built-in defaults"""
        settings = Settings.load_from_config_file(tmp_path / "absent.json")
        assert settings.solver.max_iter == 200


class TestConfigValidation:
    """Test cases for configuration validators"""

    @pytest.mark.parametrize("value", [0.0, -0.1, 1.5])
    def test_rolloff_range(self, value):
        """Test roll-off factors outside (0, 1] are rejected"""
        with pytest.raises(ValidationError, match="Roll-off"):
            WaveformConfig(rolloff_tx=value)

    def test_pilot_sign(self):
        """Test the pilot must be a sign"""
        with pytest.raises(ValidationError, match="Pilot"):
            WaveformConfig(pilot=0)

    @pytest.mark.parametrize("points", [0, 1, 1000])
    def test_qmc_points_power_of_two(self, points):
        """Test QMC point counts must be powers of two"""
        with pytest.raises(ValidationError, match="power of two"):
            BoundConfig(qmc_points=points)

    def test_minimum_randomizations(self):
        """Test fewer than 8 randomizations are rejected"""
        with pytest.raises(ValidationError, match="At least 8"):
            BoundConfig(randomizations=4)
