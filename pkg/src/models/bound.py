from typing import List, Optional

import numpy as np

from .enums import SigmaMode
from .errors import DimensionError


class MvnBox:
    """Axis-aligned integration box [lower, upper] (entries may be infinite)"""

    def __init__(self, lower: np.ndarray, upper: np.ndarray):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)

        if lower.shape != upper.shape or lower.ndim != 1:
            raise DimensionError("Box bounds must be 1-D vectors of equal length")

        if np.any(lower >= upper):
            raise ValueError("Every lower bound must be strictly below its upper bound")

        self.lower = lower
        self.upper = upper

    @classmethod
    def orthant(cls, signs: np.ndarray) -> "MvnBox":
        """(0, inf) where the sign is +1 and (-inf, 0) where it is -1"""
        signs = np.asarray(signs)
        lower = np.where(signs > 0, 0.0, -np.inf)
        upper = np.where(signs > 0, np.inf, 0.0)
        return cls(lower, upper)

    @classmethod
    def cube(cls, signs: np.ndarray) -> "MvnBox":
        """Like orthant, with 0 entries left unbounded on both sides"""
        signs = np.asarray(signs)
        lower = np.where(signs > 0, 0.0, -np.inf)
        upper = np.where(signs < 0, 0.0, np.inf)
        return cls(lower, upper)

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def free(self) -> np.ndarray:
        """Coordinates without any bound"""
        return np.isneginf(self.lower) & np.isposinf(self.upper)

    def contains_point(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((self.lower < x) & (x < self.upper)))

    def contains_pattern(self, signs: np.ndarray) -> bool:
        return self == MvnBox.orthant(signs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MvnBox):
            return NotImplemented
        return bool(np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper))

    def __repr__(self) -> str:
        return f"MvnBox(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


class MvnResult:
    """Probability of a box under a normal law with its randomization standard error"""

    def __init__(self, probability: float, error: float):
        self.probability = float(probability)
        self.error = float(error)

    def __iter__(self):
        yield self.probability
        yield self.error

    def __repr__(self) -> str:
        return f"MvnResult(probability={self.probability:.6g}, error={self.error:.2e})"


class DetectionRegion:
    """Sign patterns of one block that the Hamming detector maps to a given block symbol"""

    def __init__(self, symbol: int, rho: int, mu: np.ndarray, patterns: np.ndarray):
        patterns = np.atleast_2d(np.asarray(patterns, dtype=np.int8))
        mu = np.asarray(mu, dtype=float)

        if patterns.size and patterns.shape[1] != mu.size:
            raise DimensionError("Pattern length must match the mean vector length")

        self.symbol = int(symbol)
        self.rho = int(rho)
        self.mu = mu
        self.patterns = patterns
        self.boxes: List[MvnBox] = [MvnBox.orthant(p) for p in patterns]

    @property
    def dimension(self) -> int:
        return self.mu.size

    def contains(self, pattern: np.ndarray) -> bool:
        pattern = np.asarray(pattern, dtype=np.int8)
        return bool(np.any(np.all(self.patterns == pattern[None, :], axis=1)))

    def __repr__(self) -> str:
        return f"DetectionRegion(symbol=b{self.symbol}, rho={self.rho}, boxes={len(self.boxes)})"


class SerBoundReport:
    """Semi-analytical SER/BER upper bound at one gamma"""

    def __init__(
        self,
        gamma: float,
        sigma2: float,
        correct_probabilities: List[float],
        cdf_error_estimate: float,
        bits_per_symbol: float,
        error_probabilities: Optional[List[float]] = None,
        m_rx: Optional[int] = None,
        sigma_mode: Optional[SigmaMode] = None
    ):
        correct = np.clip(np.asarray(correct_probabilities, dtype=float), 0.0, 1.0)
        if error_probabilities is None:
            errors = 1.0 - correct
        else:
            errors = np.clip(np.asarray(error_probabilities, dtype=float), 0.0, 1.0)

        self.gamma = float(gamma)
        self.sigma2 = float(sigma2)
        self.correct_probabilities = correct.tolist()
        self.error_probabilities = errors.tolist()
        self.cdf_error_estimate = float(cdf_error_estimate)
        self.bits_per_symbol = float(bits_per_symbol)
        self.m_rx = m_rx
        self.sigma_mode = sigma_mode

    @property
    def ser_ub(self) -> float:
        """1 - P(b) * sum of P', evaluated from the error side for small values"""
        return float(np.mean(self.error_probabilities))

    @property
    def ber_ub(self) -> float:
        return self.ser_ub / self.bits_per_symbol

    def to_dict(self) -> dict:
        return {
            "m_rx": self.m_rx,
            "sigma_mode": self.sigma_mode.value if self.sigma_mode else None,
            "gamma": self.gamma,
            "sigma2": self.sigma2,
            "correct_probabilities": self.correct_probabilities,
            "ser_ub": self.ser_ub,
            "ber_ub": self.ber_ub,
            "cdf_error_estimate": self.cdf_error_estimate,
        }

    def __repr__(self) -> str:
        return f"SerBoundReport(gamma={self.gamma}, ser_ub={self.ser_ub:.4g})"


def cube_cover(patterns: np.ndarray, members: np.ndarray) -> List[np.ndarray]:
    """
    Disjoint sub-cubes whose union is the member rows of a full sign-pattern table.

    Cubes use +1/-1 for fixed coordinates and 0 for free ones. Each split takes the
    free coordinate that leaves the most single-class halves.
    """
    patterns = np.asarray(patterns, dtype=np.int8)
    members = np.asarray(members, dtype=bool)
    if patterns.shape[0] != members.size:
        raise DimensionError("Membership mask must have one entry per pattern")

    cubes: List[np.ndarray] = []

    def split(cube: np.ndarray, rows: np.ndarray) -> None:
        inside = members[rows]
        if not inside.any():
            return
        if inside.all():
            cubes.append(cube)
            return

        best, best_score = -1, -1
        for j in np.flatnonzero(cube == 0):
            score = 0
            for sign in (1, -1):
                half = inside[patterns[rows, j] == sign]
                score += int(half.all() or not half.any())
            if score > best_score:
                best, best_score = int(j), score

        for sign in (1, -1):
            child = cube.copy()
            child[best] = sign
            split(child, rows[patterns[rows, best] == sign])

    split(np.zeros(patterns.shape[1], dtype=np.int8), np.arange(patterns.shape[0]))
    return cubes
