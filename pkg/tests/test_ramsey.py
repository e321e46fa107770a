"""
Unit tests for Ramsey interference under modulation.
"""

import math

import numpy as np
import pytest
from scipy.special import j0

from src.errors import InvalidParameterError
from src.ramsey import (
    contrast_envelope, contrast_sweep, fringe_scan, ramsey_analytic, ramsey_simulated,
)
from src.waveform import make_sine

TWO_PI = 2.0 * math.pi


@pytest.mark.unit
class TestRamseyFringe:
    """Test suite for the phase-averaged fringe"""

    def test_unmodulated_cosine(self):
        """Test A = 0 gives P_e = (1 + cos ω_ref·t_d)/2"""
        delays = np.linspace(0.0, 3.0, 31)

        np.testing.assert_allclose(ramsey_analytic(2.0, 0.0, 1.0, delays),
                                   0.5 + 0.5 * np.cos(2.0 * delays), atol=1e-15)
        np.testing.assert_allclose(ramsey_simulated(0.0, 1.0, delays, omega_ref=2.0),
                                   0.5 + 0.5 * np.cos(2.0 * delays), atol=1e-12)

    def test_simulation_matches_closed_form(self):
        """Test the Bloch-sphere average reproduces the Bessel fringe"""
        delays = np.linspace(0.0, 6.0, 61)
        analytic = ramsey_analytic(0.7, 2.0, 1.5, delays)
        simulated = ramsey_simulated(2.0, 1.5, delays, omega_ref=0.7)

        np.testing.assert_allclose(simulated, analytic, atol=2e-3)

    def test_scalar_delay(self):
        """Test a scalar delay returns a float"""
        assert isinstance(ramsey_simulated(1.0, 1.0, 0.5, n_phases=256), float)
        assert isinstance(ramsey_analytic(0.0, 1.0, 1.0, 0.5), float)

    def test_arbitrary_waveform(self):
        """Test passing the sine as a waveform gives the same fringe"""
        delays = np.linspace(0.0, 2.0, 11)
        w = make_sine(3.0, 2.0)

        np.testing.assert_allclose(ramsey_simulated(0.0, 1.0, delays, waveform=w),
                                   ramsey_simulated(3.0, 2.0, delays), atol=1e-12)

    def test_too_few_phases_rejected(self):
        """Test fewer than 256 averaging phases raise"""
        with pytest.raises(InvalidParameterError):
            ramsey_simulated(1.0, 1.0, 0.5, n_phases=128)

    def test_negative_decay_rejected(self):
        """Test γ < 0 raises"""
        with pytest.raises(InvalidParameterError):
            ramsey_simulated(1.0, 1.0, 0.5, gamma=-1.0)

    def test_non_positive_fundamental_rejected(self):
        """Test Ω ≤ 0 raises"""
        with pytest.raises(InvalidParameterError):
            contrast_envelope(1.0, 0.0, 1.0)
        with pytest.raises(InvalidParameterError):
            ramsey_analytic(0.0, 1.0, -1.0, 1.0)


@pytest.mark.unit
class TestContrast:
    """Test suite for contrast against modulation frequency"""

    def test_full_revival_at_commensurate_delay(self):
        """Test contrast returns to one when Ω·t_d is a multiple of 2π"""
        fundamentals = TWO_PI * np.array([5e9, 10e9])

        np.testing.assert_allclose(contrast_envelope(TWO_PI * 5e9, fundamentals, 200e-12), 1.0, atol=1e-9)

    def test_sweep_cross_check(self):
        """Test simulated contrasts agree with |J₀| across a GHz sweep"""
        fundamentals = TWO_PI * np.linspace(50e6, 10e9, 200)

        result = contrast_sweep(TWO_PI * 5e9, 200e-12, fundamentals, workers=1)

        assert len(result.cross_check) == 8
        assert result.max_deviation < 2e-3
        assert result.contrast[-1] == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(result.p_e_max - result.p_e_min, result.contrast)
        assert len(list(result.rows())) == 200

    def test_decay_scales_contrast(self):
        """Test radiative decay multiplies the contrast by exp(−γt_d/2)"""
        fundamentals = np.array([1.0, 2.0, 3.0])
        plain = contrast_sweep(2.0, 1.5, fundamentals, cross_check_points=1, workers=1)
        decayed = contrast_sweep(2.0, 1.5, fundamentals, gamma=1.0, cross_check_points=1, workers=1)

        np.testing.assert_allclose(decayed.contrast, plain.contrast * math.exp(-0.75), rtol=1e-12)
        assert decayed.max_deviation < 2e-3

    def test_envelope_is_bessel(self):
        """Test the envelope equals |J₀(2(A/Ω)sin(Ωt_d/2))|"""
        value = contrast_envelope(3.0, 1.2, 0.8)

        assert value == pytest.approx(abs(j0(2.0 * 3.0 / 1.2 * math.sin(0.6))), rel=1e-14)

    def test_invalid_sweep_rejected(self):
        """Test an empty grid or a non-positive delay raises"""
        with pytest.raises(InvalidParameterError):
            contrast_sweep(1.0, 1.0, [])
        with pytest.raises(InvalidParameterError):
            contrast_sweep(1.0, 0.0, [1.0])


@pytest.mark.unit
class TestFringeScan:
    """Test suite for fine-delay fringe scans"""

    def test_unmodulated_full_contrast(self):
        """Test the unmodulated fringe swings from zero to one"""
        result = fringe_scan(TWO_PI, 0.0, 1.0, np.linspace(0.0, 1.0, 201))

        assert result.contrast[0] == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(result.simulated_fringe, result.fringe, atol=1e-12)
        assert len(list(result.fringe_rows())) == 201

    def test_single_delay_rejected(self):
        """Test a scan needs at least two delays"""
        with pytest.raises(InvalidParameterError):
            fringe_scan(1.0, 1.0, 1.0, [0.5])
