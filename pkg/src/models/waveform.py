from typing import Optional

import numpy as np

from .enums import PulseKind
from .errors import DimensionError


class PulseShape:
    """Sampled pulse description (RC transmit or RRC receive)"""

    def __init__(
        self,
        kind: PulseKind,
        rolloff: float,
        samples_per_symbol: int,
        half_span_symbols: int,
        symbol_period: float = 1.0
    ):
        if not isinstance(kind, PulseKind):
            raise ValueError(f"Invalid pulse kind: {kind}")

        if not 0.0 < rolloff <= 1.0:
            raise ValueError(f"Roll-off factor must lie in (0, 1], got {rolloff}")

        if samples_per_symbol < 1:
            raise ValueError("Samples per symbol must be a positive integer")

        if half_span_symbols < 1:
            raise ValueError("Half span must cover at least one symbol")

        if symbol_period <= 0:
            raise ValueError("Symbol period must be positive")

        self.kind = kind
        self.rolloff = float(rolloff)
        self.samples_per_symbol = int(samples_per_symbol)
        self.half_span_symbols = int(half_span_symbols)
        self.symbol_period = float(symbol_period)

    @property
    def amplitude(self) -> float:
        """Energy normalization factor a = (T / samples_per_symbol) ** 0.5"""
        return float(np.sqrt(self.symbol_period / self.samples_per_symbol))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PulseShape):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.rolloff == other.rolloff
            and self.samples_per_symbol == other.samples_per_symbol
            and self.half_span_symbols == other.half_span_symbols
            and self.symbol_period == other.symbol_period
        )

    def __repr__(self) -> str:
        return (f"PulseShape(kind={self.kind.value}, rolloff={self.rolloff}, "
                f"samples_per_symbol={self.samples_per_symbol}, "
                f"half_span_symbols={self.half_span_symbols})")


class SystemDims:
    """Frame and antenna dimensions of the oversampled downlink"""

    def __init__(
        self,
        n_symbols: int,
        m_rx: int,
        m_tx: Optional[int] = None,
        n_tx: int = 1,
        n_u: int = 1
    ):
        m_tx = m_rx if m_tx is None else m_tx

        if n_symbols < 1:
            raise DimensionError("Frame must hold at least one symbol")

        if m_rx < 1 or m_tx < 1:
            raise DimensionError("Oversampling and signaling-rate factors must be positive")

        if m_rx % m_tx != 0:
            raise DimensionError(f"M_Rx={m_rx} is not an integer multiple of M_Tx={m_tx}")

        if n_u < 1:
            raise DimensionError("At least one user is required")

        if n_tx < n_u:
            raise DimensionError(f"N_t={n_tx} transmit antennas cannot serve N_u={n_u} users")

        self.n_symbols = int(n_symbols)
        self.m_rx = int(m_rx)
        self.m_tx = int(m_tx)
        self.n_tx = int(n_tx)
        self.n_u = int(n_u)

    @property
    def m(self) -> int:
        return self.m_rx // self.m_tx

    @property
    def n_tot(self) -> int:
        return self.n_symbols * self.m_rx + 1

    @property
    def n_q(self) -> int:
        return self.n_symbols * self.m_tx + 1

    def with_symbols(self, n_symbols: int) -> "SystemDims":
        return SystemDims(n_symbols, self.m_rx, self.m_tx, self.n_tx, self.n_u)

    def to_dict(self) -> dict:
        return {
            "n_symbols": self.n_symbols,
            "m_rx": self.m_rx,
            "m_tx": self.m_tx,
            "n_tx": self.n_tx,
            "n_u": self.n_u,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SystemDims):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(tuple(self.to_dict().values()))

    def __repr__(self) -> str:
        return (f"SystemDims(N={self.n_symbols}, M_Rx={self.m_rx}, M_Tx={self.m_tx}, "
                f"N_t={self.n_tx}, N_u={self.n_u})")


class BandedToeplitz:
    """Banded Toeplitz filter matrix: row i holds the tap vector shifted by row_shift * i"""

    def __init__(self, rows: int, cols: int, first_row_taps: np.ndarray, row_shift: int = 1):
        taps = np.array(first_row_taps, dtype=float)
        if taps.ndim != 1 or taps.size == 0:
            raise DimensionError("Tap vector must be a non-empty 1-D array")

        if rows < 1 or cols < 1 or row_shift < 0:
            raise DimensionError("Matrix shape and row shift must be positive")

        if (rows - 1) * row_shift + taps.size > cols:
            raise DimensionError(
                f"{taps.size} taps shifted over {rows} rows do not fit in {cols} columns"
            )

        taps.setflags(write=False)
        self.rows = int(rows)
        self.cols = int(cols)
        self.first_row_taps = taps
        self.row_shift = int(row_shift)

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    @property
    def energy(self) -> float:
        """Row energy a^2 * sum(g^2) of the normalized taps"""
        return float(np.sum(self.first_row_taps ** 2))

    def to_dense(self) -> np.ndarray:
        matrix = np.zeros((self.rows, self.cols))
        width = self.first_row_taps.size
        for i in range(self.rows):
            start = i * self.row_shift
            matrix[i, start:start + width] = self.first_row_taps
        return matrix

    def __repr__(self) -> str:
        return (f"BandedToeplitz(rows={self.rows}, cols={self.cols}, "
                f"taps={self.first_row_taps.size}, row_shift={self.row_shift})")


class SystemModel:
    """Matrices of one system configuration shared by precoding, bound and simulation"""

    def __init__(
        self,
        dims: SystemDims,
        tx_shape: PulseShape,
        rx_shape: PulseShape,
        gtx: BandedToeplitz,
        grx: BandedToeplitz,
        v: np.ndarray,
        u: np.ndarray
    ):
        if v.shape != (dims.n_tot, dims.n_tot):
            raise DimensionError(f"V has shape {v.shape}, expected {(dims.n_tot, dims.n_tot)}")

        if u.shape != (dims.n_tot, dims.n_q):
            raise DimensionError(f"U has shape {u.shape}, expected {(dims.n_tot, dims.n_q)}")

        self.dims = dims
        self.tx_shape = tx_shape
        self.rx_shape = rx_shape
        self.gtx = gtx
        self.grx = grx
        self.v = v
        self.u = u
        self.gtx_dense = gtx.to_dense()
        self.grx_dense = grx.to_dense()
        self.vu = v @ u
        self.w = self.gtx_dense.T @ u

        for array in (self.v, self.u, self.gtx_dense, self.grx_dense, self.vu, self.w):
            array.setflags(write=False)
