from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from ..models.bound import DetectionRegion, MvnBox, SerBoundReport, cube_cover
from ..models.enums import SigmaMode
from ..models.errors import TargetOutOfRangeError
from ..models.zx import ZxAlphabet, all_sign_patterns
from ..strategies.covariance_strategy import get_covariance_strategy
from ..utils.region_tables import printed_rows
from .modulation_service import ModulationService
from .mvn_service import MvnService
from ..config.settings import BoundConfig, WaveformConfig
from ..config.logging import get_logger

logger = get_logger(__name__)

SER_MEMO_LIMIT = 4096


class BoundService:
    """Semi-analytical SER/BER upper bound from detection-region probabilities"""

    def __init__(
        self,
        modulation_service: Optional[ModulationService] = None,
        mvn_service: Optional[MvnService] = None,
        config: Optional[BoundConfig] = None,
        waveform: Optional[WaveformConfig] = None
    ):
        self.config = config or BoundConfig()
        self.waveform = waveform or WaveformConfig()
        self.modulation_service = modulation_service or ModulationService()
        self.mvn_service = mvn_service or MvnService(self.config)
        self._labels: Dict[int, np.ndarray] = {}
        self._covers: Dict[Tuple[int, int], List[MvnBox]] = {}
        self._ser_memo: Dict[tuple, float] = {}

    def enumerate_detection_regions(self, alphabet: ZxAlphabet, rho: int, gamma: float) -> List[DetectionRegion]:
        """Assign every sign pattern of one block to the block symbol it is detected as"""
        if rho not in (1, -1):
            raise ValueError("rho must be +1 or -1")

        patterns = all_sign_patterns(alphabet.block_length)
        labels = self._pattern_labels(alphabet)

        regions = []
        for label in range(alphabet.n_blocks):
            mu = gamma * np.concatenate(
                [[rho], self.modulation_service.block_codeword(label, rho, alphabet)]
            )
            regions.append(DetectionRegion(label + 1, rho, mu, patterns[labels == label]))
        return regions

    def bound_covariance(
        self,
        alphabet: ZxAlphabet,
        sigma2: float,
        mode: Optional[SigmaMode] = None
    ) -> np.ndarray:
        """Noise covariance of one detection block for the chosen mode"""
        strategy = get_covariance_strategy(mode or self.config.sigma_mode)
        return strategy.build(
            alphabet.m_rx,
            alphabet.block_length,
            sigma2,
            self.waveform.rolloff_rx,
            self.config.window_symbols
        )

    def ser_upper_bound(
        self,
        gamma: float,
        sigma: np.ndarray,
        alphabet: ZxAlphabet,
        sigma_mode: Optional[SigmaMode] = None
    ) -> SerBoundReport:
        """SER_ub = 1 - P(b) sum_j P'(b_j), with P' = 1 - (mass outside the region of b_j)"""
        if gamma < 0:
            raise ValueError(f"Threshold gamma must be non-negative, got {gamma}")

        # rho = -1 mirrors rho = +1 exactly, so one branch suffices
        regions = self.enumerate_detection_regions(alphabet, 1, gamma)

        errors, variances = [], []
        for region in regions:
            mass, variance = 0.0, 0.0
            for box in self.error_cover(alphabet, region.symbol - 1):
                result = self.mvn_service.mvn_cdf(box, region.mu, sigma)
                mass += result.probability
                variance += result.error ** 2
            errors.append(mass)
            variances.append(variance)

        report = SerBoundReport(
            gamma=gamma,
            sigma2=float(np.mean(np.diag(sigma))),
            correct_probabilities=[1.0 - e for e in errors],
            error_probabilities=errors,
            cdf_error_estimate=float(np.sqrt(np.sum(variances))) / len(regions),
            bits_per_symbol=alphabet.bits_per_symbol,
            m_rx=alphabet.m_rx,
            sigma_mode=sigma_mode
        )

        logger.debug("SER bound evaluated", m_rx=alphabet.m_rx, gamma=gamma, ser_ub=report.ser_ub)
        return report

    def ser_curve(
        self,
        gammas: Sequence[float],
        sigma: np.ndarray,
        alphabet: ZxAlphabet,
        sigma_mode: Optional[SigmaMode] = None
    ) -> List[SerBoundReport]:
        return [self.ser_upper_bound(float(g), sigma, alphabet, sigma_mode) for g in gammas]

    def gamma_for_ser(self, target_ser: float, sigma: np.ndarray, alphabet: ZxAlphabet) -> float:
        """Invert SER_ub(gamma) = target inside the configured gamma bracket"""
        low, high = self.config.gamma_low, self.config.gamma_high
        ser_low = self._memo_ser(low, sigma, alphabet)
        ser_high = self._memo_ser(high, sigma, alphabet)

        if not ser_high < target_ser < ser_low:
            raise TargetOutOfRangeError(
                f"Target SER {target_ser:g} outside the achievable range "
                f"({ser_high:.3g}, {ser_low:.3g}) for gamma in [{low}, {high}]"
            )

        log_target = np.log(target_ser)

        def gap(gamma: float) -> float:
            ser = self._memo_ser(gamma, sigma, alphabet)
            return float(np.log(max(ser, 1e-300)) - log_target)

        gamma = float(brentq(gap, low, high, xtol=1e-6, maxiter=200))
        achieved = self._memo_ser(gamma, sigma, alphabet)

        if abs(achieved - target_ser) > self.config.relative_tol * target_ser:
            logger.warning(
                "Gamma search stopped outside tolerance",
                target_ser=target_ser,
                achieved=achieved,
                gamma=gamma
            )

        logger.info("Gamma resolved from target SER", m_rx=alphabet.m_rx, target_ser=target_ser, gamma=gamma)
        return gamma

    def region_mass(self, regions: Sequence[DetectionRegion], mu: np.ndarray, sigma: np.ndarray) -> float:
        """Total probability of the given regions under N(mu, sigma)"""
        return float(sum(
            self.mvn_service.mvn_cdf(box, mu, sigma).probability
            for region in regions
            for box in region.boxes
        ))

    def table_discrepancies(self, alphabet: ZxAlphabet) -> List[dict]:
        """Published region rows whose bounds or detected symbol disagree with their sequence"""
        regions = {r.symbol: r for r in self.enumerate_detection_regions(alphabet, 1, 1.0)}
        issues = []
        for symbol, sequence, lower, upper in printed_rows(alphabet.m_rx):
            printed = MvnBox(np.array(lower, dtype=float), np.array(upper, dtype=float))
            reasons = []
            if not printed.contains_pattern(np.array(sequence)):
                reasons.append("bounds do not match sequence")
            if not regions[symbol].contains(np.array(sequence)):
                reasons.append("sequence detected as another symbol")

            if reasons:
                issue = {"symbol": symbol, "sequence": list(sequence), "reasons": reasons}
                issues.append(issue)
                logger.warning("Published region row is inconsistent", m_rx=alphabet.m_rx, **issue)
        return issues

    def error_cover(self, alphabet: ZxAlphabet, label: int) -> List[MvnBox]:
        """Disjoint boxes covering every sign pattern not detected as codebook entry label (0-based)"""
        key = (alphabet.m_rx, label)
        if key not in self._covers:
            patterns = all_sign_patterns(alphabet.block_length)
            cubes = cube_cover(patterns, self._pattern_labels(alphabet) != label)
            self._covers[key] = [MvnBox.cube(cube) for cube in cubes]
            logger.debug("Error cover built", m_rx=alphabet.m_rx, label=label, boxes=len(cubes),
                         patterns=int(np.sum(self._pattern_labels(alphabet) != label)))
        return self._covers[key]

    def _memo_ser(self, gamma: float, sigma: np.ndarray, alphabet: ZxAlphabet) -> float:
        # QMC point sets are seeded, so a repeated (gamma, sigma) gives the same value
        key = (alphabet.m_rx, np.ascontiguousarray(sigma, dtype=float).tobytes(), float(gamma))
        if key not in self._ser_memo:
            if len(self._ser_memo) >= SER_MEMO_LIMIT:
                self._ser_memo.clear()
            self._ser_memo[key] = self.ser_upper_bound(gamma, sigma, alphabet).ser_ub
        return self._ser_memo[key]

    def _pattern_labels(self, alphabet: ZxAlphabet) -> np.ndarray:
        if alphabet.m_rx not in self._labels:
            patterns = all_sign_patterns(alphabet.block_length)
            self._labels[alphabet.m_rx] = self.modulation_service.detect_labels(patterns, alphabet)
        return self._labels[alphabet.m_rx]
