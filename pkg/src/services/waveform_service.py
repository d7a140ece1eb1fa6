from typing import Sequence, Union

import numpy as np
from scipy.linalg import toeplitz

from ..models.enums import PulseKind
from ..models.errors import CovarianceError, DimensionError
from ..models.waveform import BandedToeplitz, PulseShape, SystemDims
from ..strategies.pulse_strategy import get_pulse_strategy
from ..config.logging import get_logger

logger = get_logger(__name__)

Window = Union[range, Sequence[int]]


class WaveformService:
    """Builds pulse taps, filter matrices and the filtered-noise covariance"""

    def pulse_value(self, shape: PulseShape, t: float) -> float:
        """Evaluate the analytic pulse at time t (removable singularities by their limits)"""
        strategy = get_pulse_strategy(shape.kind)
        return float(strategy.evaluate(np.array([t]), shape.rolloff, shape.symbol_period)[0])

    def normalized_taps(self, dims: SystemDims, shape: PulseShape) -> np.ndarray:
        """
        Taps a*g on the receive grid t = k*T/M_Rx, k = -N_tot..N_tot.

        Pulses sampled at T/M_Tx (transmit side) are zero-filled between their
        grid points. The result is scaled so that a^2 * sum(g^2) = 1.
        """
        self._check_shape(dims, shape)

        half = dims.n_tot
        k = np.arange(-half, half + 1)
        step = dims.m_rx // shape.samples_per_symbol
        on_grid = (k % step) == 0

        strategy = get_pulse_strategy(shape.kind)
        t = k * shape.symbol_period / dims.m_rx
        raw = np.where(on_grid, strategy.evaluate(t, shape.rolloff, shape.symbol_period), 0.0)

        # Symmetrize to remove rounding asymmetry in the closed forms
        raw = 0.5 * (raw + raw[::-1])

        a = shape.amplitude
        energy = a ** 2 * np.sum(raw ** 2)
        g = raw / np.sqrt(energy)
        return a * g

    def build_gtx(self, dims: SystemDims, shape: PulseShape) -> BandedToeplitz:
        """Transmit filter matrix G_Tx (N_tot x 3N_tot)"""
        if shape.kind != PulseKind.RAISED_COSINE:
            raise DimensionError(f"G_Tx requires a raised-cosine pulse, got {shape.kind.value}")

        if shape.samples_per_symbol != dims.m_tx:
            raise DimensionError(
                f"Transmit pulse sampled at {shape.samples_per_symbol}/T, expected M_Tx={dims.m_tx}"
            )

        return self._banded(dims, shape)

    def build_grx(self, dims: SystemDims, shape: PulseShape) -> BandedToeplitz:
        """Receive filter matrix G_Rx (N_tot x 3N_tot)"""
        if shape.kind != PulseKind.ROOT_RAISED_COSINE:
            raise DimensionError(f"G_Rx requires a root-raised-cosine pulse, got {shape.kind.value}")

        if shape.samples_per_symbol != dims.m_rx:
            raise DimensionError(
                f"Receive pulse sampled at {shape.samples_per_symbol}/T, expected M_Rx={dims.m_rx}"
            )

        return self._banded(dims, shape)

    def build_v(self, dims: SystemDims, tx: PulseShape, rx: PulseShape) -> np.ndarray:
        """Combined waveform matrix V with V[i, j] = v((j - i) T / M_Rx)"""
        h_tx = self.build_gtx(dims, tx).first_row_taps
        h_rx = self.build_grx(dims, rx).first_row_taps

        v = np.convolve(h_tx, h_rx)
        center = v.size // 2
        lags = v[center:center + dims.n_tot]

        logger.debug("Combined waveform built", v0=float(lags[0]), n_tot=dims.n_tot)
        return toeplitz(lags)

    def build_u(self, dims: SystemDims) -> np.ndarray:
        """M-fold upsampling selector U (N_tot x N_q)"""
        u = np.zeros((dims.n_tot, dims.n_q))
        u[dims.m * np.arange(dims.n_q), np.arange(dims.n_q)] = 1.0
        return u

    def noise_covariance(self, grx: BandedToeplitz, window: Window, sigma2_dim: float) -> np.ndarray:
        """Covariance of G_Rx-filtered white noise restricted to the window samples"""
        if sigma2_dim <= 0:
            raise ValueError("Noise variance per real dimension must be positive")

        indices = np.asarray(list(window), dtype=int)
        if indices.size == 0 or indices.min() < 0 or indices.max() >= grx.rows:
            raise DimensionError(f"Window {window} outside the {grx.rows} receive samples")

        rows = grx.to_dense()[indices]
        sigma = sigma2_dim * (rows @ rows.T)

        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as e:
            raise CovarianceError(
                "Filtered-noise covariance is not positive definite; receive filter over-truncated"
            ) from e

        return sigma

    def _banded(self, dims: SystemDims, shape: PulseShape) -> BandedToeplitz:
        taps = self.normalized_taps(dims, shape)
        return BandedToeplitz(dims.n_tot, 3 * dims.n_tot, taps, row_shift=1)

    def _check_shape(self, dims: SystemDims, shape: PulseShape) -> None:
        if dims.m_rx % shape.samples_per_symbol != 0:
            raise DimensionError(
                f"Pulse rate {shape.samples_per_symbol}/T does not divide M_Rx={dims.m_rx}"
            )

        if shape.half_span_symbols != dims.n_symbols:
            raise DimensionError(
                f"Pulse half span {shape.half_span_symbols} does not match N={dims.n_symbols}"
            )
