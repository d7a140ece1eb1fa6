from abc import ABC, abstractmethod

import numpy as np

from ..models.enums import PulseKind

# Distance below which a time instant is treated as sitting on a removable singularity
_SINGULARITY_ATOL = 1e-12


class PulseStrategy(ABC):
    """Abstract base class for analytic pulse shapes"""

    @property
    @abstractmethod
    def kind(self) -> PulseKind:
        """Return the pulse kind this strategy evaluates"""
        pass

    @abstractmethod
    def evaluate(self, t: np.ndarray, rolloff: float, symbol_period: float = 1.0) -> np.ndarray:
        """Evaluate the pulse at the time instants t"""
        pass


class RaisedCosineStrategy(PulseStrategy):
    """Raised-cosine pulse with unit peak and zeros at nonzero multiples of T"""

    @property
    def kind(self) -> PulseKind:
        return PulseKind.RAISED_COSINE

    def evaluate(self, t: np.ndarray, rolloff: float, symbol_period: float = 1.0) -> np.ndarray:
        x = np.asarray(t, dtype=float) / symbol_period
        eps = rolloff

        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.sinc(x) * np.cos(np.pi * eps * x) / (1.0 - (2.0 * eps * x) ** 2)

        # |t| = T / (2 eps)
        edge = np.isclose(np.abs(x), 1.0 / (2.0 * eps), rtol=0.0, atol=_SINGULARITY_ATOL)
        values = np.where(edge, np.pi / 4.0 * np.sinc(1.0 / (2.0 * eps)), values)

        # Nyquist zeros are exact
        nearest = np.round(x)
        integer = np.isclose(x, nearest, rtol=0.0, atol=_SINGULARITY_ATOL)
        values = np.where(integer & (nearest != 0), 0.0, values)
        return np.where(integer & (nearest == 0), 1.0, values)


class RootRaisedCosineStrategy(PulseStrategy):
    """Root-raised-cosine pulse in its unit-energy form"""

    @property
    def kind(self) -> PulseKind:
        return PulseKind.ROOT_RAISED_COSINE

    def evaluate(self, t: np.ndarray, rolloff: float, symbol_period: float = 1.0) -> np.ndarray:
        x = np.asarray(t, dtype=float) / symbol_period
        eps = rolloff

        with np.errstate(divide="ignore", invalid="ignore"):
            numerator = np.sin(np.pi * x * (1.0 - eps)) + 4.0 * eps * x * np.cos(np.pi * x * (1.0 + eps))
            denominator = np.pi * x * (1.0 - (4.0 * eps * x) ** 2)
            values = numerator / denominator

        origin = np.isclose(x, 0.0, rtol=0.0, atol=_SINGULARITY_ATOL)
        values = np.where(origin, 1.0 - eps + 4.0 * eps / np.pi, values)

        # |t| = T / (4 eps)
        edge = np.isclose(np.abs(x), 1.0 / (4.0 * eps), rtol=0.0, atol=_SINGULARITY_ATOL)
        edge_value = eps / np.sqrt(2.0) * (
            (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * eps))
            + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * eps))
        )
        values = np.where(edge, edge_value, values)
        return values / symbol_period


# Factory function for getting pulse strategies
def get_pulse_strategy(kind: PulseKind) -> PulseStrategy:
    """Factory function to get appropriate pulse strategy"""
    strategy_map = {
        PulseKind.RAISED_COSINE: RaisedCosineStrategy,
        PulseKind.ROOT_RAISED_COSINE: RootRaisedCosineStrategy,
    }

    if kind not in strategy_map:
        raise ValueError(f"Unsupported pulse kind: {kind}")

    return strategy_map[kind]()
