import pytest
import numpy as np
from src.services.simulation_service import (
    MIN_CDF_CHANNELS,
    ROLE_CHANNEL,
    SimulationService,
    stream,
)
from src.models.enums import SweepParameter
from src.models.errors import ConfigurationError
from src.models.simulation import SimConfig


@pytest.fixture
def simulation_service(system_factory, modulation_service, precoding_service, shared_mvn_service, bound_config):
    return SimulationService(system_factory, modulation_service, precoding_service, shared_mvn_service, bound_config)


def make_config(**overrides) -> SimConfig:
    values = {
        "n_symbols": 2,
        "m_rx": 3,
        "gamma": 2.0,
        "sigma2": 1.0,
        "trials": 400,
        "batch_size": 100,
        "seed": 11,
        "sigma_mode": "white",
        "include_bound": False,
    }
    values.update(overrides)
    return SimConfig(**values)


class TestRandomDraws:
    """Test cases for channel and noise generation"""

    def test_channel_statistics(self, simulation_service, rng):
        """Test channel entries are zero-mean with unit power"""
        h = simulation_service.draw_channel(1, 40000, rng)
        assert h.shape == (1, 40000)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.03)
        assert abs(np.mean(h)) < 0.02

    def test_channel_needs_enough_antennas(self, simulation_service, rng):
        """Test N_t < N_u is rejected"""
        with pytest.raises(ValueError):
            simulation_service.draw_channel(3, 2, rng)

    def test_noise_variance_per_real_dimension(self, simulation_service, rng):
        """Test each quadrature carries variance sigma2"""
        noise = simulation_service.draw_noise((200000,), 2.0, rng)
        assert np.var(noise.real) == pytest.approx(2.0, rel=0.02)
        assert np.var(noise.imag) == pytest.approx(2.0, rel=0.02)

    def test_streams_are_independent_and_reproducible(self):
        """Test stream cells differ from each other and repeat exactly"""
        first = stream(5, 0, 0, ROLE_CHANNEL).standard_normal(4)
        again = stream(5, 0, 0, ROLE_CHANNEL).standard_normal(4)
        other = stream(5, 1, 0, ROLE_CHANNEL).standard_normal(4)
        assert np.array_equal(first, again)
        assert not np.array_equal(first, other)


class TestMonteCarlo:
    """Test cases for Monte Carlo link simulation"""

    def test_noiseless_link_is_error_free(self, simulation_service):
        """Test sigma2 = 0 produces no symbol or bit errors"""
        # Arrange
        config = make_config(sigma2=0.0, trials=200)

        # Act
        result = simulation_service.monte_carlo(config)

        # Assert
        assert result.outcome.symbol_errors == 0
        assert result.outcome.bit_errors == 0
        assert result.outcome.symbols == 200 * 2 * 2
        assert result.ser_ub is None

    def test_noiseless_multiuser_link(self, simulation_service):
        """Test zero forcing keeps two users error free without noise"""
        config = make_config(sigma2=0.0, n_u=2, n_tx=3, trials=50, batch_size=25)
        result = simulation_service.monte_carlo(config)
        assert result.outcome.symbol_errors == 0
        assert result.outcome.symbols == 50 * 2 * 2 * 2

    def test_noiseless_block_codebook(self, simulation_service):
        """Test M_Rx = 2 pairs are detected without errors and count 3 bits per pair"""
        config = make_config(sigma2=0.0, m_rx=2, n_symbols=2, trials=100)
        result = simulation_service.monte_carlo(config)
        assert result.outcome.symbol_errors == 0
        assert result.outcome.bits == 100 * 2 * 3

    def test_deterministic(self, simulation_service, system_factory, modulation_service, precoding_service):
        """Test the same seed gives identical counts across service instances"""
        config = make_config()
        fresh = SimulationService(system_factory, modulation_service, precoding_service)
        assert simulation_service.monte_carlo(config).outcome == fresh.monte_carlo(config).outcome

    def test_workers_do_not_change_results(self, simulation_service):
        """Test concurrent batches reproduce the sequential counts bit for bit"""
        sequential = simulation_service.monte_carlo(make_config(workers=1))
        parallel = simulation_service.monte_carlo(make_config(workers=3))
        assert sequential.outcome == parallel.outcome

    def test_seed_changes_results(self, simulation_service):
        """Test different seeds draw different noise"""
        first = simulation_service.monte_carlo(make_config(sigma2=4.0, seed=1))
        second = simulation_service.monte_carlo(make_config(sigma2=4.0, seed=2))
        assert first.outcome.symbol_errors != second.outcome.symbol_errors or \
            first.outcome.bit_errors != second.outcome.bit_errors

    def test_energy_scales_with_gamma_squared(self, simulation_service):
        """Test E_Tx(2 gamma) = 4 E_Tx(gamma) for identical payloads and channel"""
        one = simulation_service.monte_carlo(make_config(gamma=1.0, trials=100))
        two = simulation_service.monte_carlo(make_config(gamma=2.0, trials=100))
        assert two.etx == pytest.approx(4.0 * one.etx, rel=1e-9)

    def test_snr_required(self, simulation_service):
        """Test SNR_Req = E_Tx / (N_q N_0 (1 + eps_Tx)) in dB"""
        config = make_config(n0=2.0)
        result = simulation_service.monte_carlo(config)
        expected = 10.0 * np.log10(result.etx / (config.dims().n_q * 2.0 * 1.22))
        assert result.snr_req_db == pytest.approx(expected, rel=1e-9)

    def test_redraw_reports_one_snr_per_batch(self, simulation_service):
        """Test channel redraws give one SNR value per batch"""
        result = simulation_service.monte_carlo(make_config(channel_mode="redraw", n_tx=2))
        assert len(result.snr_req_db_per_channel) == 4

    def test_max_errors_stops_early(self, simulation_service):
        """Test the error target ends the run after the batch that reaches it"""
        config = make_config(sigma2=25.0, trials=2000, batch_size=50, max_errors=10)
        result = simulation_service.monte_carlo(config)
        assert result.outcome.symbol_errors >= 10
        assert result.outcome.frames < 2000

    def test_bound_column(self, simulation_service):
        """Test the bound is attached when requested"""
        result = simulation_service.monte_carlo(make_config(include_bound=True))
        assert 0.0 < result.ser_ub < 1.0
        assert result.ber_ub == pytest.approx(result.ser_ub / 2.0)

    def test_zero_gamma_rejected(self, simulation_service):
        """Test a gamma = 0 design is refused"""
        with pytest.raises(ConfigurationError, match="gamma = 0"):
            simulation_service.monte_carlo(make_config(gamma=0.0))

    def test_target_resolves_gamma(self, simulation_service):
        """Test a target SER is turned into gamma through the bound"""
        config = make_config(gamma=None, target_ser=1e-2)
        gamma = simulation_service.resolve_gamma(config)
        assert gamma == pytest.approx(2.65, abs=0.15)

    def test_run_trial_single_frame(self, simulation_service):
        """Test one trial sends one frame per user and quadrature"""
        config = make_config(sigma2=0.0)
        outcome = simulation_service.run_trial(config, np.array([[1.0 + 0j]]), np.random.default_rng(0))
        assert outcome.frames == 1
        assert outcome.symbols == 4
        assert outcome.symbol_errors == 0


class TestSweepAndCdf:
    """Test cases for sweeps and SER CDFs"""

    def test_gamma_sweep_records_failures(self, simulation_service):
        """Test a failing grid point becomes an error row and the rest still run"""
        # Arrange
        config = make_config(gamma=None, sweep_parameter="gamma", sweep_values=[0.0, 2.0], trials=100)

        # Act
        rows = simulation_service.sweep(config)

        # Assert
        assert [row.ok for row in rows] == [False, True]
        assert "gamma = 0" in rows[0].error
        assert rows[1].result.gamma == 2.0

    def test_symbol_sweep(self, simulation_service):
        """Test N sweeps rebuild the link for every frame length"""
        config = make_config(sweep_parameter=SweepParameter.N_SYMBOLS, sweep_values=[1, 2], trials=50, sigma2=0.0)
        rows = simulation_service.sweep(config)
        assert [row.result.outcome.symbols for row in rows] == [50 * 2 * 1, 50 * 2 * 2]

    def test_sweep_requires_grid(self, simulation_service):
        """Test a plain configuration cannot be swept"""
        with pytest.raises(ConfigurationError):
            simulation_service.sweep(make_config())

    def test_cdf_needs_enough_channels(self, simulation_service):
        """Test fewer than the minimum channel draws are rejected"""
        with pytest.raises(ConfigurationError, match=str(MIN_CDF_CHANNELS)):
            simulation_service.ser_cdf(make_config(n_tx=2), MIN_CDF_CHANNELS - 1)

    def test_cdf_values(self, simulation_service):
        """Test one SER per channel draw and a CDF ending at 1"""
        config = make_config(n_tx=2, trials=20, batch_size=20, target_ser=None)
        result = simulation_service.ser_cdf(config, MIN_CDF_CHANNELS)
        assert result.ser_values.size == MIN_CDF_CHANNELS
        assert np.all((result.ser_values >= 0.0) & (result.ser_values <= 1.0))
        assert result.cdf[-1] == 1.0
