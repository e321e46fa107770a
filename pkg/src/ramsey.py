"""
Ramsey interference of the modulated emitter.

Two resonant π/2 pulses, modelled as instantaneous rotations, enclose a free
evolution of length t_d during which the coherence picks up
Φ(t_c + t_d) − Φ(t_c) + ω_ref·t_d. The microwave phase is free-running, so
the fringe is averaged over the pulse time t_c across one modulation period.
For a sine drive the average has the closed form

    P_e = 1/2 + 1/2·cos(ω_ref·t_d)·J₀(2(A/Ω)·sin(Ω·t_d/2)).
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import j0

from .errors import InvalidParameterError
from .logging_config import get_logger
from .parallel import parallel_map
from .waveform import ModulationWaveform, accumulated_phase, make_sine

logger = get_logger(__name__)

MIN_PHASES = 256
DEFAULT_PHASES = 4096
CROSS_CHECK_POINTS = 8
CROSS_CHECK_TOLERANCE = 2e-3

# instantaneous π/2 rotation about x in the (g, e) basis
HALF_PI_PULSE = np.array([[1.0, -1.0j], [-1.0j, 1.0]]) / math.sqrt(2.0)


@dataclass
class RamseyResult:
    """
    Fringe and contrast data of a Ramsey experiment.

    `fundamentals` and `contrast` run along the modulation-frequency axis; a
    fringe scan holds a single fundamental and the fringe along `delays`.
    """

    amplitude: float
    fundamentals: np.ndarray
    delays: np.ndarray
    contrast: np.ndarray
    p_e_min: np.ndarray
    p_e_max: np.ndarray
    fringe: Optional[np.ndarray] = field(default=None, repr=False)
    simulated_fringe: Optional[np.ndarray] = field(default=None, repr=False)
    cross_check: List[Tuple[float, float, float]] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        if not self.cross_check:
            return 0.0
        return max(abs(analytic - simulated) for _, analytic, simulated in self.cross_check)

    def rows(self):
        """(omega_hz, t_delay_s, contrast, p_e_min, p_e_max) rows"""
        delays = np.broadcast_to(self.delays, self.fundamentals.shape) \
            if self.delays.size == 1 else self.delays
        for omega, delay, c, lo, hi in zip(self.fundamentals, delays, self.contrast,
                                           self.p_e_min, self.p_e_max):
            yield float(omega / (2.0 * math.pi)), float(delay), float(c), float(lo), float(hi)

    def fringe_rows(self):
        """(t_delay_s, p_e_analytic, p_e_simulated) rows of a fringe scan"""
        for delay, analytic, simulated in zip(self.delays, self.fringe, self.simulated_fringe):
            yield float(delay), float(analytic), float(simulated)


def _check_fundamental(fundamental) -> None:
    if np.any(np.asarray(fundamental) <= 0):
        raise InvalidParameterError("modulation frequency must be positive")


def contrast_envelope(amplitude: float, fundamental, t_delay):
    """|J₀(2(A/Ω)·sin(Ω·t_d/2))|"""
    _check_fundamental(fundamental)
    fundamental = np.asarray(fundamental, dtype=float)
    return np.abs(j0(2.0 * amplitude / fundamental * np.sin(0.5 * fundamental * np.asarray(t_delay))))


def ramsey_analytic(omega_ref: float, amplitude: float, fundamental: float, t_delay):
    """Phase-averaged excited population after the second π/2 pulse"""
    _check_fundamental(fundamental)
    t_delay = np.asarray(t_delay, dtype=float)
    argument = 2.0 * amplitude / fundamental * np.sin(0.5 * fundamental * t_delay)
    value = 0.5 + 0.5 * np.cos(omega_ref * t_delay) * j0(argument)
    return value if t_delay.ndim else float(value)


def _precession_phases(w: ModulationWaveform, t_delay: np.ndarray, n_phases: int) -> np.ndarray:
    """Φ(t_c + t_d) − Φ(t_c) for t_c on a uniform grid over one period; shape (n_delays, n_phases)"""
    t_c = w.period * np.arange(n_phases) / n_phases
    start = accumulated_phase(w, t_c)
    end = accumulated_phase(w, np.add.outer(t_delay, t_c))
    return end - start


def _excited_after_sequence(precession: np.ndarray, decay: np.ndarray) -> np.ndarray:
    """ρ_ee after π/2, free evolution and π/2 for every precession phase"""
    psi = HALF_PI_PULSE @ np.array([1.0, 0.0])
    rho = np.outer(psi, psi.conj())
    coherence = rho[1, 0] * np.exp(-1j * precession) * decay[..., None]
    # the second rotation only reads the trace and Im ρ_eg; trace is preserved
    return 0.5 * np.real(rho[0, 0] + rho[1, 1]) - np.imag(coherence)


def ramsey_simulated(amplitude: float, fundamental: float, t_delay, n_phases: int = DEFAULT_PHASES,
                     omega_ref: float = 0.0, gamma: float = 0.0,
                     waveform: Optional[ModulationWaveform] = None,
                     fringe_phase: Optional[float] = None):
    """
    Bloch-sphere simulation averaged over a uniform grid of modulation phases.

    Args:
        amplitude, fundamental: sine drive A·sin(Ωt) in rad/s
        t_delay: delay or array of delays in seconds
        n_phases: number of microwave phases averaged over (at least 256)
        omega_ref: emitter detuning from the pulse carrier (rad/s)
        gamma: radiative decay during the free evolution; 0 disables it
        waveform: arbitrary modulation replacing the sine drive
        fringe_phase: replaces ω_ref·t_d, for reading the contrast at fixed delay
    """
    if n_phases < MIN_PHASES:
        raise InvalidParameterError("phase average needs at least 256 phases", n_phases=n_phases)
    if gamma < 0:
        raise InvalidParameterError("decay rate must be non-negative", gamma=gamma)
    w = waveform if waveform is not None else make_sine(amplitude, fundamental)
    delays = np.atleast_1d(np.asarray(t_delay, dtype=float))
    reference = omega_ref * delays if fringe_phase is None else np.full(delays.shape, fringe_phase)
    precession = _precession_phases(w, delays, n_phases) + reference[:, None]
    decay = np.exp(-0.5 * gamma * delays)
    p_e = np.mean(_excited_after_sequence(precession, decay), axis=-1)
    return p_e if np.ndim(t_delay) else float(p_e[0])


def _simulated_contrast(amplitude: float, fundamental: float, t_delay: float,
                        n_phases: int, gamma: float) -> float:
    bright = ramsey_simulated(amplitude, fundamental, t_delay, n_phases, gamma=gamma, fringe_phase=0.0)
    dark = ramsey_simulated(amplitude, fundamental, t_delay, n_phases, gamma=gamma, fringe_phase=math.pi)
    return abs(bright - dark)


def contrast_sweep(amplitude: float, t_delay: float, fundamentals: Sequence[float],
                   n_phases: int = DEFAULT_PHASES, gamma: float = 0.0,
                   cross_check_points: int = CROSS_CHECK_POINTS,
                   workers: Optional[int] = None) -> RamseyResult:
    """
    Fringe contrast against modulation frequency at fixed delay.

    The contrast is max − min of the fringe over a fine delay window, short
    enough that only ω_ref·t_d moves; it equals |J₀(...)|·e^{−γt_d/2}. A
    simulated cross-check runs at evenly spaced grid points.
    """
    fundamentals = np.asarray(fundamentals, dtype=float)
    if fundamentals.ndim != 1 or fundamentals.size == 0:
        raise InvalidParameterError("fundamental grid must be a non-empty 1-D sequence")
    _check_fundamental(fundamentals)
    if not t_delay > 0:
        raise InvalidParameterError("delay must be positive", t_delay=t_delay)

    contrast = contrast_envelope(amplitude, fundamentals, t_delay) * math.exp(-0.5 * gamma * t_delay)
    count = min(cross_check_points, fundamentals.size)
    picks = sorted(set(np.linspace(0, fundamentals.size - 1, count).round().astype(int).tolist()))
    simulated = parallel_map(
        lambda i: _simulated_contrast(amplitude, fundamentals[i], t_delay, n_phases, gamma),
        picks, workers)
    cross_check = [(float(fundamentals[i]), float(contrast[i]), s) for i, s in zip(picks, simulated)]

    result = RamseyResult(amplitude, fundamentals, np.array([t_delay]), contrast,
                          0.5 - 0.5 * contrast, 0.5 + 0.5 * contrast, cross_check=cross_check)
    level = logger.warning if result.max_deviation > CROSS_CHECK_TOLERANCE else logger.info
    level(
        "Ramsey contrast sweep finished",
        extra={'extra_fields': {'points': int(fundamentals.size),
                                'max_deviation': result.max_deviation}}
    )
    return result


def fringe_scan(omega_ref: float, amplitude: float, fundamental: float, delays: Sequence[float],
                n_phases: int = DEFAULT_PHASES, gamma: float = 0.0) -> RamseyResult:
    """Fine-delay fringe, analytic and simulated, and the contrast across the window"""
    delays = np.asarray(delays, dtype=float)
    if delays.ndim != 1 or delays.size < 2:
        raise InvalidParameterError("fringe scan needs at least two delays")
    analytic = 0.5 + (np.asarray(ramsey_analytic(omega_ref, amplitude, fundamental, delays)) - 0.5) \
        * np.exp(-0.5 * gamma * delays)
    simulated = ramsey_simulated(amplitude, fundamental, delays, n_phases, omega_ref, gamma)
    lo, hi = float(np.min(simulated)), float(np.max(simulated))
    return RamseyResult(amplitude, np.array([fundamental]), delays, np.array([hi - lo]),
                        np.array([lo]), np.array([hi]), analytic, simulated,
                        cross_check=[(fundamental, float(np.max(analytic) - np.min(analytic)), hi - lo)])
