import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..factories.system_factory import SystemFactory
from ..models.enums import ChannelMode, Quadrature
from ..models.errors import ConfigurationError
from ..models.precoding import SpatialPrecoder
from ..models.simulation import MonteCarloResult, SerCdfResult, SimConfig, SweepRow, TrialOutcome
from ..models.waveform import SystemModel
from ..models.zx import ZxAlphabet
from .bound_service import BoundService
from .modulation_service import ModulationService
from .mvn_service import MvnService
from .precoding_service import PrecodingService
from ..config.settings import BoundConfig, WaveformConfig
from ..config.logging import get_logger

logger = get_logger(__name__)

MIN_CDF_CHANNELS = 50

# Stream roles of SeedSequence([seed, batch, user, role, ...])
ROLE_BITS_I = 0
ROLE_BITS_Q = 1
ROLE_NOISE = 2
ROLE_CHANNEL = 3

StreamFactory = Callable[[int, int], np.random.Generator]


def stream(seed: int, batch: int, user: int, role: int, *extra: int) -> np.random.Generator:
    """Independent generator for one (batch, user, role) cell"""
    return np.random.default_rng(np.random.SeedSequence([seed, batch, user, role, *extra]))


class _Link:
    """Matrices, alphabet and unit QoS solutions of one system configuration"""

    def __init__(self, system: SystemModel, alphabet: ZxAlphabet, modulation: ModulationService):
        self.system = system
        self.alphabet = alphabet
        self.codebook = modulation.codebook_array(alphabet)
        self.label_bits = modulation.label_bit_table(alphabet)
        self.unit_solutions: Dict[bytes, np.ndarray] = {}
        self.lock = threading.Lock()


class SimulationService:
    """
    Monte Carlo link simulation of the precoded, filtered and 1-bit quantized downlink.

    QoS solutions are computed once per c_out pattern at beta = gamma = 1 and scaled
    by gamma / beta: the program is positively homogeneous in gamma and B scales
    linearly with beta.
    """

    def __init__(
        self,
        system_factory: Optional[SystemFactory] = None,
        modulation_service: Optional[ModulationService] = None,
        precoding_service: Optional[PrecodingService] = None,
        mvn_service: Optional[MvnService] = None,
        bound_config: Optional[BoundConfig] = None
    ):
        self.system_factory = system_factory or SystemFactory()
        self.modulation_service = modulation_service or ModulationService()
        self.precoding_service = precoding_service or PrecodingService()
        self.bound_config = bound_config or BoundConfig()
        self.mvn_service = mvn_service or MvnService(self.bound_config)
        self._links: Dict[tuple, _Link] = {}
        self._lock = threading.Lock()

    def draw_channel(self, n_u: int, n_t: int, rng: np.random.Generator) -> np.ndarray:
        """i.i.d. CN(0, 1) channel matrix (N_u x N_t)"""
        if n_t < n_u:
            raise ValueError(f"N_t={n_t} must be at least N_u={n_u}")
        return (rng.standard_normal((n_u, n_t)) + 1j * rng.standard_normal((n_u, n_t))) / np.sqrt(2.0)

    def draw_noise(self, shape: Tuple[int, ...], sigma2: float, rng: np.random.Generator) -> np.ndarray:
        """Complex white noise with variance sigma2 in each real dimension"""
        scale = np.sqrt(sigma2)
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    def bound_service(self, config: SimConfig) -> BoundService:
        waveform = WaveformConfig(rolloff_tx=config.rolloff_tx, rolloff_rx=config.rolloff_rx, pilot=config.rho0)
        bound_config = self.bound_config.model_copy(update={"sigma_mode": config.sigma_mode})
        return BoundService(self.modulation_service, self.mvn_service, bound_config, waveform)

    def resolve_gamma(self, config: SimConfig) -> float:
        """Fixed gamma, or the gamma whose SER bound meets the target"""
        if config.gamma is not None:
            gamma = config.gamma
        elif config.target_ser is not None:
            bound = self.bound_service(config)
            alphabet = config.alphabet()
            sigma = bound.bound_covariance(alphabet, config.sigma2, config.sigma_mode)
            gamma = bound.gamma_for_ser(config.target_ser, sigma, alphabet)
        else:
            raise ConfigurationError("Neither gamma nor target_ser is set for this point")

        if gamma <= 0:
            raise ConfigurationError("A gamma = 0 design has no decision margin; the SER estimate is degenerate")
        return gamma

    def run_trial(self, config: SimConfig, h: np.ndarray, rng: np.random.Generator) -> TrialOutcome:
        """One frame per user through channel h, every random draw taken from rng"""
        gamma = self.resolve_gamma(config)
        link = self._link(config)
        spatial = self.precoding_service.zf_precoder(h)
        return self._simulate_frames(config, link, h, spatial, gamma, 1, lambda user, role: rng)

    def monte_carlo(self, config: SimConfig) -> MonteCarloResult:
        """Aggregate SER/BER, Wilson intervals, energy and SNR_Req over all batches"""
        gamma = self.resolve_gamma(config)
        link = self._link(config)

        fixed_channel = None
        if config.channel_mode == ChannelMode.FIXED:
            fixed_channel = self.draw_channel(config.n_u, config.n_tx, stream(config.seed, 0, 0, ROLE_CHANNEL))

        def run_batch(batch: int, size: int) -> TrialOutcome:
            h = fixed_channel
            if h is None:
                h = self.draw_channel(config.n_u, config.n_tx, stream(config.seed, batch, 0, ROLE_CHANNEL))
            spatial = self.precoding_service.zf_precoder(h)
            return self._simulate_frames(
                config, link, h, spatial, gamma, size,
                lambda user, role: stream(config.seed, batch, user, role)
            )

        outcomes = self._run_batches(config, run_batch)
        total = sum(outcomes, TrialOutcome())
        snr_db = self._snr_db(config, outcomes, total)

        ser_ub = ber_ub = None
        if config.include_bound and config.sigma2 > 0:
            ser_ub, ber_ub = self._bound_point(config, gamma)

        result = MonteCarloResult(gamma, total, snr_db, link.system.dims.n_q, ser_ub, ber_ub)
        logger.info(
            "Monte Carlo point finished",
            gamma=gamma,
            ser=result.ser,
            symbols=total.symbols,
            symbol_errors=total.symbol_errors,
            ser_ub=ser_ub
        )
        return result

    def sweep(self, config: SimConfig) -> List[SweepRow]:
        """One Monte Carlo row per grid value; a failing point is recorded and skipped"""
        if config.sweep_parameter is None or not config.sweep_values:
            raise ConfigurationError("Sweep needs a parameter and a nonempty grid")

        rows = []
        for value in config.sweep_values:
            try:
                point = config.at_point(config.sweep_parameter, value)
            except ValueError as e:
                logger.warning("Sweep point rejected", parameter=config.sweep_parameter.value, value=value, error=str(e))
                rows.append(SweepRow(config.sweep_parameter, value, config, error=str(e)))
                continue

            try:
                rows.append(SweepRow(config.sweep_parameter, value, point, result=self.monte_carlo(point)))
            except (ValueError, RuntimeError) as e:
                logger.warning("Sweep point failed", parameter=config.sweep_parameter.value, value=value, error=str(e))
                rows.append(SweepRow(config.sweep_parameter, value, point, error=str(e)))

        logger.info("Sweep finished", parameter=config.sweep_parameter.value, points=len(rows),
                    failed=sum(not row.ok for row in rows))
        return rows

    def ser_cdf(self, config: SimConfig, n_channels: int) -> SerCdfResult:
        """Measured SER of the gamma design over independent channel realizations"""
        if n_channels < MIN_CDF_CHANNELS:
            raise ConfigurationError(f"A SER CDF needs at least {MIN_CDF_CHANNELS} channel draws, got {n_channels}")

        gamma = self.resolve_gamma(config)
        link = self._link(config)

        values = []
        for channel in range(n_channels):
            h = self.draw_channel(config.n_u, config.n_tx, stream(config.seed, 0, 0, ROLE_CHANNEL, channel))
            spatial = self.precoding_service.zf_precoder(h)

            def run_batch(batch: int, size: int, h=h, spatial=spatial, channel=channel) -> TrialOutcome:
                return self._simulate_frames(
                    config, link, h, spatial, gamma, size,
                    lambda user, role: stream(config.seed, batch, user, role, channel)
                )

            total = sum(self._run_batches(config, run_batch), TrialOutcome())
            values.append(total.symbol_errors / total.symbols)

        result = SerCdfResult(values, gamma, config.target_ser)
        if config.target_ser is not None:
            logger.info("SER CDF finished", channels=n_channels, gamma=gamma,
                        fraction_met=result.evaluate(config.target_ser))
        return result

    def _run_batches(self, config: SimConfig, run_batch: Callable[[int, int], TrialOutcome]) -> List[TrialOutcome]:
        """Batches in index order; with max_errors, stop after the first batch that reaches it"""
        sizes = [min(config.batch_size, config.trials - start) for start in range(0, config.trials, config.batch_size)]
        outcomes: List[TrialOutcome] = []
        errors = 0

        # Chunks of `workers` batches run concurrently; accumulation stays in batch order
        step = config.workers
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            for start in range(0, len(sizes), step):
                indices = range(start, min(start + step, len(sizes)))
                chunk = list(executor.map(lambda b: run_batch(b, sizes[b]), indices))
                for outcome in chunk:
                    outcomes.append(outcome)
                    errors += outcome.symbol_errors
                    if config.max_errors is not None and errors >= config.max_errors:
                        logger.debug("Error target reached", batches=len(outcomes), errors=errors)
                        return outcomes
        return outcomes

    def _simulate_frames(
        self,
        config: SimConfig,
        link: _Link,
        h: np.ndarray,
        spatial: SpatialPrecoder,
        gamma: float,
        n_frames: int,
        streams: StreamFactory
    ) -> TrialOutcome:
        system, alphabet = link.system, link.alphabet
        dims = system.dims
        n_blocks = dims.n_symbols // alphabet.block_symbols
        scale = gamma / spatial.c_zf

        blocks: Dict[Tuple[int, Quadrature], np.ndarray] = {}
        temporal = np.empty((n_frames, dims.n_u, dims.n_q), dtype=complex)
        for user in range(dims.n_u):
            parts = []
            for quadrature, role in ((Quadrature.IN_PHASE, ROLE_BITS_I), (Quadrature.QUADRATURE, ROLE_BITS_Q)):
                bits = streams(user, role).integers(0, 2, size=(n_frames, n_blocks * alphabet.n_bits))
                sent = self.modulation_service.bits_to_block_array(bits, alphabet)
                c_out = self.modulation_service.encode_blocks(sent, config.rho0, alphabet)
                blocks[(user, quadrature)] = sent
                parts.append(scale * self._unit_solutions(link, c_out))
            temporal[:, user, :] = parts[0] + 1j * parts[1]

        # x = P_sp R with rows of R equal to (W p_xk)^T
        r = temporal @ system.w.T
        x = np.einsum("au,tus->tas", spatial.p_sp, r)
        energy = np.sum(np.abs(x) ** 2, axis=(1, 2))
        received = np.einsum("ka,tas->tks", h, x)

        for user in range(dims.n_u):
            received[:, user, :] += self.draw_noise((n_frames, received.shape[2]), config.sigma2, streams(user, ROLE_NOISE))
        y = received @ system.grx_dense.T

        symbol_errors = bit_errors = 0
        for user in range(dims.n_u):
            for quadrature, part in ((Quadrature.IN_PHASE, y[:, user].real), (Quadrature.QUADRATURE, y[:, user].imag)):
                z = np.where(part >= 0.0, 1, -1).astype(np.int8)
                detected = self.modulation_service.detect_frames(z, alphabet)
                sent = blocks[(user, quadrature)]
                symbol_errors += int(np.count_nonzero(link.codebook[detected] != link.codebook[sent]))
                bit_errors += int(np.count_nonzero(link.label_bits[detected] != link.label_bits[sent]))

        streams_per_frame = 2 * dims.n_u
        mean_energy = float(np.mean(energy))
        snr = mean_energy / (dims.n_q * config.n0 * (1.0 + config.rolloff_tx))
        return TrialOutcome(
            symbol_errors=symbol_errors,
            bit_errors=bit_errors,
            symbols=n_frames * streams_per_frame * dims.n_symbols,
            bits=n_frames * streams_per_frame * n_blocks * alphabet.n_bits,
            e_tx=float(np.sum(energy)),
            frames=n_frames,
            snr_req=snr
        )

    def _unit_solutions(self, link: _Link, c_out: np.ndarray) -> np.ndarray:
        """Optimal p at beta = gamma = 1 for each row of c_out"""
        patterns, inverse = np.unique(c_out, axis=0, return_inverse=True)
        solutions = np.empty((patterns.shape[0], link.system.dims.n_q))

        for i, pattern in enumerate(patterns):
            key = pattern.tobytes()
            with link.lock:
                cached = link.unit_solutions.get(key)
            if cached is None:
                problem = self.precoding_service.build_qos_problem(pattern, link.system, 1.0, 1.0)
                solution = self.precoding_service.qp_service.solve(problem)
                self.precoding_service.check_solution(solution, 0, Quadrature.IN_PHASE)
                cached = solution.p
                with link.lock:
                    link.unit_solutions[key] = cached
            solutions[i] = cached

        return solutions[np.ravel(inverse)]

    def _link(self, config: SimConfig) -> _Link:
        dims = config.dims()
        key = (dims, config.rolloff_tx, config.rolloff_rx)
        with self._lock:
            if key not in self._links:
                waveform = WaveformConfig(rolloff_tx=config.rolloff_tx, rolloff_rx=config.rolloff_rx, pilot=config.rho0)
                system = self.system_factory.create_system(dims, waveform)
                self._links[key] = _Link(system, config.alphabet(), self.modulation_service)
                logger.debug("Link prepared", **dims.to_dict())
            return self._links[key]

    def _snr_db(self, config: SimConfig, outcomes: List[TrialOutcome], total: TrialOutcome) -> List[float]:
        """SNR_Req in dB, one value per channel realization"""
        if config.channel_mode == ChannelMode.FIXED:
            return [10.0 * np.log10(total.snr_req)]
        return [10.0 * np.log10(outcome.snr_req) for outcome in outcomes]

    def _bound_point(self, config: SimConfig, gamma: float) -> Tuple[float, float]:
        bound = self.bound_service(config)
        alphabet = config.alphabet()
        sigma = bound.bound_covariance(alphabet, config.sigma2, config.sigma_mode)
        report = bound.ser_upper_bound(gamma, sigma, alphabet, config.sigma_mode)
        return report.ser_ub, report.ber_ub
