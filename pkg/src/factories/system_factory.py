from typing import Optional

from ..models.enums import PulseKind
from ..models.waveform import PulseShape, SystemDims, SystemModel
from ..services.waveform_service import WaveformService
from ..config.settings import WaveformConfig


class SystemFactory:
    """Factory for assembling the pulse shapes and matrices of one system configuration"""

    def __init__(self, waveform_service: Optional[WaveformService] = None):
        self.waveform_service = waveform_service or WaveformService()

    def create_dims(
        self,
        n_symbols: int,
        m_rx: int,
        m_tx: Optional[int] = None,
        n_tx: int = 1,
        n_u: int = 1
    ) -> SystemDims:
        """Create validated system dimensions (M_Tx defaults to M_Rx)"""
        return SystemDims(n_symbols=n_symbols, m_rx=m_rx, m_tx=m_tx, n_tx=n_tx, n_u=n_u)

    def create_tx_shape(self, dims: SystemDims, rolloff: float) -> PulseShape:
        return PulseShape(
            kind=PulseKind.RAISED_COSINE,
            rolloff=rolloff,
            samples_per_symbol=dims.m_tx,
            half_span_symbols=dims.n_symbols
        )

    def create_rx_shape(self, dims: SystemDims, rolloff: float) -> PulseShape:
        return PulseShape(
            kind=PulseKind.ROOT_RAISED_COSINE,
            rolloff=rolloff,
            samples_per_symbol=dims.m_rx,
            half_span_symbols=dims.n_symbols
        )

    def create_system(self, dims: SystemDims, waveform: Optional[WaveformConfig] = None) -> SystemModel:
        """Build G_Tx, G_Rx, V and U for the given dimensions"""
        waveform = waveform or WaveformConfig()
        tx_shape = self.create_tx_shape(dims, waveform.rolloff_tx)
        rx_shape = self.create_rx_shape(dims, waveform.rolloff_rx)

        service = self.waveform_service
        return SystemModel(
            dims=dims,
            tx_shape=tx_shape,
            rx_shape=rx_shape,
            gtx=service.build_gtx(dims, tx_shape),
            grx=service.build_grx(dims, rx_shape),
            v=service.build_v(dims, tx_shape, rx_shape),
            u=service.build_u(dims)
        )
