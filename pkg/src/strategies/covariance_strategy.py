from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from ..models.enums import PulseKind, SigmaMode
from ..models.waveform import PulseShape, SystemDims
from ..services.waveform_service import WaveformService


class CovarianceStrategy(ABC):
    """Abstract base class for the noise covariance of one detection block"""

    @property
    @abstractmethod
    def mode(self) -> SigmaMode:
        """Return the covariance mode this strategy builds"""
        pass

    @abstractmethod
    def build(self, m_rx: int, block_length: int, sigma2: float, rolloff_rx: float, window_symbols: int) -> np.ndarray:
        """Covariance of block_length consecutive receive samples"""
        pass


class CorrelatedCovarianceStrategy(CovarianceStrategy):
    """sigma2 * G_Rx G_Rx^T restricted to a window centred in the frame"""

    def __init__(self, waveform_service: Optional[WaveformService] = None):
        self.waveform_service = waveform_service or WaveformService()

    @property
    def mode(self) -> SigmaMode:
        return SigmaMode.CORRELATED

    def build(self, m_rx: int, block_length: int, sigma2: float, rolloff_rx: float, window_symbols: int) -> np.ndarray:
        n_symbols = max(window_symbols, -(-block_length // m_rx))
        dims = SystemDims(n_symbols=n_symbols, m_rx=m_rx)
        shape = PulseShape(PulseKind.ROOT_RAISED_COSINE, rolloff_rx, m_rx, n_symbols)
        grx = self.waveform_service.build_grx(dims, shape)

        start = (dims.n_tot - block_length) // 2
        return self.waveform_service.noise_covariance(grx, range(start, start + block_length), sigma2)


class WhiteCovarianceStrategy(CovarianceStrategy):
    """sigma2 * I, ignoring receive-filter correlation"""

    @property
    def mode(self) -> SigmaMode:
        return SigmaMode.WHITE

    def build(self, m_rx: int, block_length: int, sigma2: float, rolloff_rx: float, window_symbols: int) -> np.ndarray:
        if sigma2 <= 0:
            raise ValueError("Noise variance per real dimension must be positive")
        return sigma2 * np.eye(block_length)


# Factory function for getting covariance strategies
def get_covariance_strategy(mode: SigmaMode) -> CovarianceStrategy:
    """Factory function to get appropriate covariance strategy"""
    strategy_map = {
        SigmaMode.CORRELATED: CorrelatedCovarianceStrategy,
        SigmaMode.WHITE: WhiteCovarianceStrategy,
    }

    if mode not in strategy_map:
        raise ValueError(f"Unsupported covariance mode: {mode}")

    return strategy_map[mode]()
