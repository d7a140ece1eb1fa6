import pytest
import numpy as np
from src.strategies.pulse_strategy import (
    RaisedCosineStrategy,
    RootRaisedCosineStrategy,
    get_pulse_strategy,
)
from src.models.enums import PulseKind


class TestPulseStrategy:
    """Test cases for analytic pulse strategies"""

    @pytest.fixture
    def rc_strategy(self):
        """Create raised-cosine strategy"""
        return RaisedCosineStrategy()

    @pytest.fixture
    def rrc_strategy(self):
        """Create root-raised-cosine strategy"""
        return RootRaisedCosineStrategy()

    @pytest.fixture
    def fine_grid(self):
        dt = 1e-3
        return np.arange(-40.0, 40.0 + dt / 2, dt), dt

    def test_rc_unit_peak_and_nyquist_zeros(self, rc_strategy):
        """Test raised cosine is 1 at the origin and 0 at nonzero symbol instants"""
        # Act
        values = rc_strategy.evaluate(np.arange(-5, 6), 0.22)

        # Assert
        assert values[5] == 1.0
        assert np.all(values[np.arange(11) != 5] == 0.0)

    def test_rc_edge_singularity_uses_limit(self, rc_strategy):
        """Test the removable singularity at |t| = T / (2 eps) takes its limit value"""
        # Act
        at_edge = rc_strategy.evaluate(np.array([2.5, -2.5]), 0.2)
        nearby = rc_strategy.evaluate(np.array([2.5 + 1e-6]), 0.2)

        # Assert
        assert at_edge == pytest.approx([0.1, 0.1], abs=1e-12)
        assert nearby[0] == pytest.approx(0.1, abs=1e-4)

    def test_rrc_origin_value(self, rrc_strategy):
        """Test root raised cosine at t = 0"""
        eps = 0.22
        value = rrc_strategy.evaluate(np.array([0.0]), eps)[0]
        assert value == pytest.approx(1.0 - eps + 4.0 * eps / np.pi, abs=1e-12)

    def test_rrc_edge_singularity_is_continuous(self, rrc_strategy):
        """Test the value at |t| = T / (4 eps) matches its neighbours"""
        # Arrange
        eps = 0.25

        # Act
        edge = rrc_strategy.evaluate(np.array([1.0]), eps)[0]
        left = rrc_strategy.evaluate(np.array([1.0 - 1e-6]), eps)[0]
        right = rrc_strategy.evaluate(np.array([1.0 + 1e-6]), eps)[0]

        # Assert
        assert np.isfinite(edge)
        assert edge == pytest.approx(left, abs=1e-5)
        assert edge == pytest.approx(right, abs=1e-5)

    def test_rrc_has_unit_energy(self, rrc_strategy, fine_grid):
        """Test the continuous root raised cosine carries unit energy"""
        t, dt = fine_grid
        energy = np.sum(rrc_strategy.evaluate(t, 0.22) ** 2) * dt
        assert energy == pytest.approx(1.0, abs=5e-3)

    def test_rrc_self_convolution_is_raised_cosine(self, rrc_strategy, rc_strategy, fine_grid):
        """Test RRC * RRC reproduces the raised cosine at symbol instants"""
        # Arrange
        t, dt = fine_grid
        p = rrc_strategy.evaluate(t, 0.22)

        # Act
        combined = np.convolve(p, p, mode="same") * dt
        centre = t.size // 2
        step = int(round(1.0 / dt))

        # Assert
        assert combined[centre] == pytest.approx(rc_strategy.evaluate(np.array([0.0]), 0.22)[0], abs=1e-2)
        assert combined[centre + step] == pytest.approx(0.0, abs=1e-2)

    def test_symbol_period_scaling(self, rrc_strategy):
        """Test RRC values scale with 1/T and stretch with T"""
        base = rrc_strategy.evaluate(np.array([0.3]), 0.22)[0]
        stretched = rrc_strategy.evaluate(np.array([0.6]), 0.22, symbol_period=2.0)[0]
        assert stretched == pytest.approx(base / 2.0)

    def test_strategy_kinds(self, rc_strategy, rrc_strategy):
        """Test strategies report their pulse kind"""
        assert rc_strategy.kind == PulseKind.RAISED_COSINE
        assert rrc_strategy.kind == PulseKind.ROOT_RAISED_COSINE


class TestPulseStrategyFactory:
    """Test cases for the pulse strategy factory"""

    @pytest.mark.parametrize("kind,expected", [
        (PulseKind.RAISED_COSINE, RaisedCosineStrategy),
        (PulseKind.ROOT_RAISED_COSINE, RootRaisedCosineStrategy),
    ])
    def test_get_pulse_strategy(self, kind, expected):
        """Test factory returns the matching strategy"""
        assert isinstance(get_pulse_strategy(kind), expected)

    def test_get_pulse_strategy_invalid(self):
        """Test factory rejects unknown kinds"""
        with pytest.raises(ValueError, match="Unsupported pulse kind"):
            get_pulse_strategy("triangle")
