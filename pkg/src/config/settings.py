from pathlib import Path
from typing import Optional
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
import json

from ..models.enums import ChannelMode, SigmaMode

CONFIG_DIR = Path(__file__).parent.parent.parent / "config"


class WaveformConfig(BaseModel):
    rolloff_tx: float = 0.22
    rolloff_rx: float = 0.22
    pilot: int = 1

    @field_validator("rolloff_tx", "rolloff_rx")
    @classmethod
    def validate_rolloff(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError("Roll-off factor must lie in (0, 1]")
        return v

    @field_validator("pilot")
    @classmethod
    def validate_pilot(cls, v):
        if v not in (1, -1):
            raise ValueError("Pilot sample must be +1 or -1")
        return v


class SolverConfig(BaseModel):
    feasibility_tol: float = 1e-8
    kkt_tol: float = 1e-6
    max_iter: int = 200
    regularization: float = 1e-10


class BoundConfig(BaseModel):
    sigma_mode: SigmaMode = SigmaMode.CORRELATED
    qmc_points: int = 2048
    randomizations: int = 8
    seed: int = 20240601
    window_symbols: int = 8
    gamma_low: float = 0.0
    gamma_high: float = 8.0
    relative_tol: float = 1e-3

    @field_validator("randomizations")
    @classmethod
    def validate_randomizations(cls, v):
        if v < 8:
            raise ValueError("At least 8 QMC randomizations are required")
        return v

    @field_validator("qmc_points")
    @classmethod
    def validate_qmc_points(cls, v):
        if v < 2 or v & (v - 1):
            raise ValueError("QMC points per randomization must be a power of two")
        return v


class SimulationConfig(BaseModel):
    trials: int = 10000
    batch_size: int = 2000
    seed: int = 7
    channel_mode: ChannelMode = ChannelMode.FIXED
    workers: int = 1


class OutputConfig(BaseModel):
    results_dir: str = "results"
    archive_url: Optional[str] = None


class Settings(BaseSettings):
    # Logging Configuration
    log_level: str = Field("INFO")
    log_file: Optional[str] = Field(None)

    # Configuration objects
    waveform: WaveformConfig = WaveformConfig()
    solver: SolverConfig = SolverConfig()
    bound: BoundConfig = BoundConfig()
    simulation: SimulationConfig = SimulationConfig()
    output: OutputConfig = OutputConfig()

    model_config = SettingsConfigDict(
        env_prefix="ZXQOS_",
        env_nested_delimiter="__",
        env_file=CONFIG_DIR / ".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @classmethod
    def load_from_config_file(cls, config_file: Path = CONFIG_DIR / "config.json"):
        """Load configuration from the JSON file, letting environment variables win"""
        file_data = {}
        if config_file.exists():
            with open(config_file, "r") as f:
                file_data = json.load(f)

        # Environment is read by BaseSettings; JSON only fills what it leaves unset
        env_settings = cls()
        explicit = env_settings.model_dump(exclude_unset=True)
        merged = _deep_merge(file_data, explicit)
        return cls(**merged)


def _deep_merge(base: dict, override: dict) -> dict:
    result = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value
    return result


# Global settings instance - will be initialized when needed
settings = None


def get_settings() -> Settings:
    """Get or create the global settings instance"""
    global settings
    if settings is None:
        settings = Settings.load_from_config_file()
    return settings


def reset_settings() -> None:
    """Drop the cached settings so the next call re-reads file and environment"""
    global settings
    settings = None
