import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.stats import norm

from .enums import ChannelMode, SigmaMode, SweepParameter
from .waveform import SystemDims
from .zx import ZxAlphabet


class SimConfig(BaseModel):
    """One Monte Carlo experiment: system, noise, threshold source, trials and optional sweep"""

    n_symbols: int = Field(1, ge=1)
    m_rx: int = 3
    m_tx: Optional[int] = None
    n_tx: int = Field(1, ge=1)
    n_u: int = Field(1, ge=1)
    rolloff_tx: float = Field(0.22, gt=0.0, le=1.0)
    rolloff_rx: float = Field(0.22, gt=0.0, le=1.0)
    sigma2: float = Field(1.0, ge=0.0)
    n0: float = Field(1.0, gt=0.0)
    gamma: Optional[float] = None
    target_ser: Optional[float] = None
    trials: int = Field(10000, ge=1)
    batch_size: int = Field(2000, ge=1)
    max_errors: Optional[int] = Field(None, ge=1)
    seed: int = Field(7, ge=0, lt=2 ** 63)
    rho0: int = 1
    sigma_mode: SigmaMode = SigmaMode.CORRELATED
    channel_mode: ChannelMode = ChannelMode.FIXED
    workers: int = Field(1, ge=1)
    include_bound: bool = True
    sweep_parameter: Optional[SweepParameter] = None
    sweep_values: List[float] = Field(default_factory=list)

    @field_validator("rho0")
    @classmethod
    def validate_rho0(cls, v):
        if v not in (1, -1):
            raise ValueError("Pilot sample must be +1 or -1")
        return v

    @field_validator("gamma")
    @classmethod
    def validate_gamma(cls, v):
        if v is not None and (not np.isfinite(v) or v < 0):
            raise ValueError("Threshold gamma must be finite and non-negative")
        return v

    @field_validator("target_ser")
    @classmethod
    def validate_target(cls, v):
        if v is not None and not 0.0 < v < 1.0:
            raise ValueError("Target SER must lie in (0, 1)")
        return v

    @model_validator(mode="after")
    def check_consistency(self):
        sweep_threshold = self.sweep_parameter in (SweepParameter.GAMMA, SweepParameter.TARGET_SER)
        sources = (self.gamma is not None) + (self.target_ser is not None) + sweep_threshold
        if sources != 1:
            raise ValueError("Exactly one of gamma, target_ser or a gamma/target_ser sweep must be given")

        if self.sweep_parameter is not None and not self.sweep_values:
            raise ValueError("A sweep needs at least one grid value")

        if self.sweep_parameter is None and self.sweep_values:
            raise ValueError("Sweep values given without a sweep parameter")

        needs_bound = self.target_ser is not None or self.sweep_parameter == SweepParameter.TARGET_SER
        if needs_bound and self.sigma2 <= 0:
            raise ValueError("A target SER needs a positive noise variance")

        alphabet = ZxAlphabet(self.m_rx)
        symbol_counts = [self.n_symbols]
        if self.sweep_parameter == SweepParameter.N_SYMBOLS:
            symbol_counts = [int(v) for v in self.sweep_values]
        for n in symbol_counts:
            if n < 1 or n % alphabet.block_symbols != 0:
                raise ValueError(f"N={n} must be a positive multiple of {alphabet.block_symbols} for M_Rx={self.m_rx}")

        n_tx_values = [self.n_tx]
        if self.sweep_parameter == SweepParameter.N_TX:
            n_tx_values = [int(v) for v in self.sweep_values]
        for n_tx in n_tx_values:
            SystemDims(symbol_counts[0], self.m_rx, self.m_tx, n_tx, self.n_u)
        return self

    def dims(self) -> SystemDims:
        return SystemDims(self.n_symbols, self.m_rx, self.m_tx, self.n_tx, self.n_u)

    def alphabet(self) -> ZxAlphabet:
        return ZxAlphabet(self.m_rx)

    def at_point(self, parameter: SweepParameter, value: float) -> "SimConfig":
        """Single-point copy of this config with one sweep parameter fixed"""
        update: Dict[str, Any] = {"sweep_parameter": None, "sweep_values": []}
        if parameter == SweepParameter.GAMMA:
            update["gamma"] = float(value)
        elif parameter == SweepParameter.TARGET_SER:
            update["target_ser"] = float(value)
        elif parameter == SweepParameter.N_SYMBOLS:
            update["n_symbols"] = int(value)
        elif parameter == SweepParameter.N_TX:
            update["n_tx"] = int(value)
        return SimConfig(**{**self.model_dump(), **update})


class TrialOutcome:
    """Error and energy counts accumulated over one or more frames"""

    def __init__(
        self,
        symbol_errors: int = 0,
        bit_errors: int = 0,
        symbols: int = 0,
        bits: int = 0,
        e_tx: float = 0.0,
        frames: int = 0,
        snr_req: float = 0.0
    ):
        if symbol_errors > symbols or bit_errors > bits:
            raise ValueError("Error counts cannot exceed the number of transmitted symbols or bits")

        self.symbol_errors = int(symbol_errors)
        self.bit_errors = int(bit_errors)
        self.symbols = int(symbols)
        self.bits = int(bits)
        self.e_tx = float(e_tx)
        self.frames = int(frames)
        self.snr_req = float(snr_req)

    @property
    def mean_energy(self) -> float:
        return self.e_tx / self.frames if self.frames else 0.0

    def __add__(self, other: "TrialOutcome") -> "TrialOutcome":
        frames = self.frames + other.frames
        # SNR_Req is linear in the mean energy, so it is re-weighted by frame counts
        snr = (self.snr_req * self.frames + other.snr_req * other.frames) / frames if frames else 0.0
        return TrialOutcome(
            self.symbol_errors + other.symbol_errors,
            self.bit_errors + other.bit_errors,
            self.symbols + other.symbols,
            self.bits + other.bits,
            self.e_tx + other.e_tx,
            frames,
            snr
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrialOutcome):
            return NotImplemented
        return self.__dict__ == other.__dict__

    def __repr__(self) -> str:
        return (f"TrialOutcome(symbol_errors={self.symbol_errors}/{self.symbols}, "
                f"bit_errors={self.bit_errors}/{self.bits})")


def wilson_interval(errors: int, total: int, confidence: float = 0.95) -> tuple:
    """Wilson score interval of a binomial proportion"""
    if total <= 0:
        raise ValueError("Wilson interval needs at least one observation")

    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = errors / total
    denom = 1.0 + z * z / total
    centre = (p + z * z / (2.0 * total)) / denom
    half = z * np.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom
    return float(max(0.0, centre - half)), float(min(1.0, centre + half))


class MonteCarloResult:
    """Aggregated Monte Carlo statistics of one configuration point"""

    def __init__(
        self,
        gamma: float,
        outcome: TrialOutcome,
        snr_req_db: List[float],
        n_q: int,
        ser_ub: Optional[float] = None,
        ber_ub: Optional[float] = None
    ):
        self.gamma = float(gamma)
        self.outcome = outcome
        self.snr_req_db_per_channel = list(snr_req_db)
        self.n_q = int(n_q)
        self.ser_ub = ser_ub
        self.ber_ub = ber_ub

    @property
    def ser(self) -> float:
        return self.outcome.symbol_errors / self.outcome.symbols

    @property
    def ber(self) -> float:
        return self.outcome.bit_errors / self.outcome.bits

    @property
    def ser_ci(self) -> tuple:
        return wilson_interval(self.outcome.symbol_errors, self.outcome.symbols)

    @property
    def ber_ci(self) -> tuple:
        return wilson_interval(self.outcome.bit_errors, self.outcome.bits)

    @property
    def ser_standard_error(self) -> float:
        n = self.outcome.symbols
        return float(np.sqrt(max(self.ser * (1.0 - self.ser), 1.0 / n) / n))

    @property
    def etx(self) -> float:
        return self.outcome.mean_energy

    @property
    def snr_req_db(self) -> float:
        """Median over channel realizations"""
        return float(np.median(self.snr_req_db_per_channel))

    def to_row(self) -> Dict[str, Any]:
        lo, hi = self.ser_ci
        return {
            "gamma": self.gamma,
            "ser_mc": self.ser,
            "ser_ci_lo": lo,
            "ser_ci_hi": hi,
            "ser_ub": self.ser_ub,
            "ber_mc": self.ber,
            "ber_ub": self.ber_ub,
            "etx": self.etx,
            "snr_req_db": self.snr_req_db,
            "symbols": self.outcome.symbols,
            "symbol_errors": self.outcome.symbol_errors,
        }

    def __repr__(self) -> str:
        return f"MonteCarloResult(gamma={self.gamma:.4g}, ser={self.ser:.3e}, symbols={self.outcome.symbols})"


class SweepRow:
    """One grid point of a sweep; holds either a result or the error that stopped it"""

    def __init__(
        self,
        parameter: Optional[SweepParameter],
        value: Optional[float],
        config: SimConfig,
        result: Optional[MonteCarloResult] = None,
        error: Optional[str] = None
    ):
        if (result is None) == (error is None):
            raise ValueError("A sweep row holds exactly one of result or error")

        self.parameter = parameter
        self.value = value
        self.config = config
        self.result = result
        self.error = error

    @property
    def ok(self) -> bool:
        return self.result is not None

    def to_row(self) -> Dict[str, Any]:
        if self.result is not None:
            row = self.result.to_row()
        else:
            row = {column: None for column in RESULT_COLUMNS}
            row["gamma"] = self.config.gamma
        row.update({
            "n_symbols": self.config.n_symbols,
            "n_tx": self.config.n_tx,
            "target_ser": self.config.target_ser,
            "error": self.error or "",
        })
        return row


# Stable column order of the results CSV; new columns are only ever appended
RESULT_COLUMNS = [
    "gamma", "ser_mc", "ser_ci_lo", "ser_ci_hi", "ser_ub", "ber_mc", "ber_ub", "etx", "snr_req_db",
    "symbols", "symbol_errors", "n_symbols", "n_tx", "target_ser", "error",
]


class SerCdfResult:
    """Per-channel SER values and their empirical CDF"""

    def __init__(self, ser_values: List[float], gamma: float, target_ser: Optional[float] = None):
        if len(ser_values) == 0:
            raise ValueError("CDF needs at least one channel realization")

        self.ser_values = np.sort(np.asarray(ser_values, dtype=float))
        self.gamma = float(gamma)
        self.target_ser = target_ser

    @property
    def grid(self) -> np.ndarray:
        return np.unique(self.ser_values)

    @property
    def cdf(self) -> np.ndarray:
        return np.array([self.evaluate(x) for x in self.grid])

    def evaluate(self, x: float) -> float:
        """Fraction of realizations with SER <= x (right-continuous)"""
        return float(np.searchsorted(self.ser_values, x, side="right")) / self.ser_values.size

    def rows(self) -> List[Dict[str, float]]:
        return [{"ser": float(x), "cdf": float(c)} for x, c in zip(self.grid, self.cdf)]

    def __repr__(self) -> str:
        return f"SerCdfResult(channels={self.ser_values.size}, gamma={self.gamma:.4g})"


class RunManifest(BaseModel):
    """Snapshot written next to every result file; replaying it reproduces the run"""

    command: str
    tool_version: str
    seed: Optional[int] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    options: Dict[str, Any] = Field(default_factory=dict)
    started_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    finished_at: Optional[datetime] = None
    outputs: List[str] = Field(default_factory=list)

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2))
        return path

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        return cls.model_validate(json.loads(Path(path).read_text()))
