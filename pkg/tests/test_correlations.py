"""
Unit tests for weak-drive photon correlations.
"""

import math

import numpy as np
import pytest

from src.correlations import (
    G2Curve, correlation_map, cross_validate, drive_strength, g2_curve, g2_period_average,
    timebin_correlation, weak_drive,
)
from src.dynamics import DriveSpec, GaussianPulse
from src.errors import InsufficientSpanError, InvalidParameterError, WeakDriveError
from src.waveform import make_sine, make_waveform


def synthetic_curve(tau: np.ndarray, g2: np.ndarray) -> G2Curve:
    return G2Curve(tau, g2, g2, 1.0, 1.0)


@pytest.mark.unit
class TestWeakDrive:
    """Test suite for the weak CW drive helpers"""

    def test_default_strength(self, emitter, flat_waveform):
        """Test ε defaults to 1e-3·γ with Ω_R = 2ε"""
        d = weak_drive(flat_waveform, emitter)

        assert drive_strength(d) == pytest.approx(1e-3)
        assert d.envelope.rabi == pytest.approx(2e-3)

    def test_strong_drive_rejected(self, emitter, flat_waveform):
        """Test ε above 1e-2·γ raises WeakDriveError"""
        d = weak_drive(flat_waveform, emitter, epsilon=0.1)

        with pytest.raises(WeakDriveError):
            correlation_map(emitter, d, [0.0, 1.0], t_samples=2)

    def test_pulsed_drive_rejected(self, flat_waveform):
        """Test correlations refuse a pulsed envelope"""
        d = DriveSpec(flat_waveform, GaussianPulse(0.0, 1.0, 1.0))

        with pytest.raises(InvalidParameterError):
            drive_strength(d)

    def test_negative_delays_rejected(self, emitter, flat_waveform):
        """Test a negative delay raises"""
        with pytest.raises(InvalidParameterError):
            correlation_map(emitter, weak_drive(flat_waveform, emitter), [-1.0, 0.0], t_samples=2)


@pytest.mark.unit
class TestG2:
    """Test suite for period-averaged g²(τ)"""

    def test_unmodulated_matches_weak_limit(self, emitter, flat_waveform):
        """Test g²(τ) = (1 − exp(−γτ/2))² for resonant weak drive"""
        tau = np.linspace(0.0, 10.0, 41)
        d = weak_drive(flat_waveform, emitter, epsilon=1e-4)
        curve = g2_curve(emitter, d, tau, t_samples=4, verify_weak_drive=False, workers=1)

        np.testing.assert_allclose(curve.g2, (1.0 - np.exp(-tau / 2.0)) ** 2, atol=1e-6)

    def test_transmission_normalisation_agrees(self, emitter, flat_waveform):
        """Test the CW-transmission normalisation matches the steady intensity"""
        tau = np.linspace(0.0, 6.0, 13)
        d = weak_drive(flat_waveform, emitter, epsilon=1e-4)
        curve = g2_curve(emitter, d, tau, t_samples=4, verify_weak_drive=False, workers=1)

        np.testing.assert_allclose(curve.g2_transmission, curve.g2, rtol=1e-5, atol=1e-9)

    def test_weak_drive_verification(self, emitter, flat_waveform):
        """Test halving ε leaves g² unchanged in the weak limit"""
        tau = np.linspace(0.0, 6.0, 7)
        curve = g2_curve(emitter, weak_drive(flat_waveform, emitter), tau, t_samples=4, workers=1)

        assert curve.weak_drive_deviation is not None
        assert curve.weak_drive_deviation < 1e-3

    @pytest.mark.parametrize('fundamental', [2.5, 1.0])
    def test_antibunching_at_zero_delay(self, emitter, fundamental):
        """Test g²(0) = 0 under modulation"""
        w = make_sine(2.0 * fundamental, fundamental)
        tau = np.linspace(0.0, 2.0 * w.period, 33)
        curve = g2_curve(emitter, weak_drive(w, emitter), tau, t_samples=8,
                         verify_weak_drive=False, workers=1)

        assert abs(curve.g2[0]) < 1e-12
        assert np.all(np.isfinite(curve.g2))

    def test_map_rows_are_long_format(self, emitter, fast_sine):
        """Test the map flattens into (t, τ, G) rows"""
        cmap = correlation_map(emitter, weak_drive(fast_sine, emitter), [0.0, 0.5, 1.0],
                               t_samples=4, workers=1)

        rows = list(cmap.rows())
        assert len(rows) == 12
        assert cmap.values.shape == (4, 3)
        assert cmap.period == pytest.approx(fast_sine.period)


@pytest.mark.unit
class TestPeriodFolding:
    """Test suite for folding g² modulo the modulation period"""

    def test_synthetic_sine_fold(self):
        """Test folding 1 + 0.3·sin(Ωτ) recovers a spread of 0.6"""
        fundamental = 2.0
        period = 2.0 * math.pi / fundamental
        tau = period * np.arange(800) / 32.0
        curve = synthetic_curve(tau, 1.0 + 0.3 * np.sin(fundamental * tau))

        folded = g2_period_average(curve, fundamental, bins=32)

        assert np.all(folded.counts == 25)
        spread = np.nanmax(folded.g2_folded) - np.nanmin(folded.g2_folded)
        assert spread == pytest.approx(0.6, abs=1e-9)

    def test_settle_time_excluded(self):
        """Test samples before the settle time do not enter the fold"""
        tau = np.linspace(0.0, 30.0, 3001)
        values = np.where(tau < 5.0, 100.0, 1.0)
        folded = g2_period_average(synthetic_curve(tau, values), 2.0 * math.pi, settle_time=5.0,
                                   bins=10)

        np.testing.assert_allclose(folded.g2_folded, 1.0)

    def test_short_span_rejected(self):
        """Test fewer than 20 periods after settling raises"""
        tau = np.linspace(0.0, 5.0, 101)

        with pytest.raises(InsufficientSpanError):
            g2_period_average(synthetic_curve(tau, np.ones_like(tau)), 2.0 * math.pi)

    def test_non_positive_fundamental_rejected(self):
        """Test Ω ≤ 0 raises"""
        tau = np.linspace(0.0, 50.0, 11)

        with pytest.raises(InvalidParameterError):
            g2_period_average(synthetic_curve(tau, np.ones_like(tau)), 0.0)


@pytest.mark.unit
class TestTimeBinModel:
    """Test suite for the time-bin correlation model"""

    def test_zero_delay_vanishes(self, emitter, fast_sine):
        """Test the time-bin G(t, 0) is zero"""
        cmap = timebin_correlation(emitter, weak_drive(fast_sine, emitter), 16, bins_per_period=32)

        assert cmap.values.shape == (32, 17)
        np.testing.assert_allclose(cmap.values[:, 0], 0.0, atol=1e-30)

    def test_unmodulated_population(self, emitter, flat_waveform):
        """Test the steady amplitude gives ρ_ee ≈ 4ε²/γ² on resonance"""
        cmap = timebin_correlation(emitter, weak_drive(flat_waveform, emitter), 4, bins_per_period=16)

        np.testing.assert_allclose(cmap.rho_ee, 4e-6, rtol=1e-9)


@pytest.mark.slow
class TestCrossValidation:
    """Test suite for the time-bin versus regression cross-check"""

    def test_fast_regime_agrees(self, emitter, fast_sine):
        """Test the two correlation models agree within tolerance"""
        report = cross_validate(emitter, weak_drive(fast_sine, emitter), n_tau_bins=64)

        assert math.isfinite(report.deviation)
        assert report.within_tolerance


@pytest.mark.slow
class TestModulationRegimes:
    """Test suite for g²(τ) across modulation speeds"""

    def test_antibunching_for_random_modulations(self, emitter):
        """Test g²(0) vanishes for randomly drawn waveforms and laser settings"""
        rng = np.random.default_rng(11)
        for _ in range(50):
            fundamental = rng.uniform(0.5, 5.0)
            coefficients = fundamental * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
            d = weak_drive(make_waveform(fundamental, coefficients), emitter,
                           laser_detuning=rng.uniform(-3.0, 3.0), phase=rng.uniform(0.0, 2.0 * math.pi))
            curve = g2_curve(emitter, d, [0.0, 0.5], t_samples=4, verify_weak_drive=False, workers=1)

            assert abs(curve.g2[0]) <= 1e-6

    def test_slow_modulation_is_periodic_in_delay(self, emitter):
        """Test g²(τ + T) = g²(τ) once τ exceeds 30/γ"""
        w = make_sine(5.0, 0.2)
        base = np.linspace(30.0, 30.0 + w.period, 33)
        tau = np.concatenate([base, base + w.period])
        curve = g2_curve(emitter, weak_drive(w, emitter), tau, t_samples=8,
                         verify_weak_drive=False, workers=1)

        np.testing.assert_allclose(curve.g2[33:], curve.g2[:33], atol=1e-6)

    def test_fast_modulation_recovers_bare_emitter(self, emitter):
        """Test a laser on the first sideband of a fast drive sees g² = (1 − e^(−γτ/2))²"""
        w = make_sine(50.0, 25.0)
        tau = np.linspace(0.0, 10.0, 401)
        curve = g2_curve(emitter, weak_drive(w, emitter, laser_detuning=25.0), tau, t_samples=16,
                         verify_weak_drive=False, workers=1)

        expected = (1.0 - np.exp(-tau / 2.0)) ** 2
        assert np.max(np.abs(curve.g2 - expected)) < 0.02
