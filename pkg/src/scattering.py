"""
Single-photon scattering off a frequency-modulated emitter.

An input photon at ν leaves in the superposition of sidebands ν + pΩ with
amplitudes

    S_p(ν) = −√(γ_iγ_o) Σ_m α_m*·α_{m+p} / (γ/2 + i(ω₀ + mΩ − ν)).

Everything here is a closed-form sum over the phase-factor spectrum, so all
functions are pure and vectorised over frequency grids.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, ResolutionError
from .logging_config import get_logger
from .parallel import parallel_map
from .waveform import (
    ModulationWaveform, PhaseFactorSpectrum, eval_delta, nominal_amplitude,
    phase_factor_spectrum,
)

logger = get_logger(__name__)

# finest resolvable feature is γ/20
RESOLUTION_FRACTION = 20.0
QUASISTATIC_SAMPLES = 4096


@dataclass(frozen=True)
class EmitterParams:
    """
    Transition frequency and decay rates, all in rad/s.

    γ = 0 with γ_i = γ_o = 0 describes a closed two-level system; only the
    master-equation engine accepts it, every scattering quantity needs γ > 0.
    """

    omega0: float
    gamma: float
    gamma_in: float
    gamma_out: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise InvalidParameterError("gamma must be non-negative", gamma=self.gamma)
        if self.gamma == 0:
            if self.gamma_in != 0 or self.gamma_out != 0:
                raise InvalidParameterError("a closed emitter has no channel couplings",
                                            gamma_in=self.gamma_in, gamma_out=self.gamma_out)
            return
        if not (self.gamma_in > 0 and self.gamma_out > 0):
            raise InvalidParameterError("channel couplings must be positive",
                                        gamma_in=self.gamma_in, gamma_out=self.gamma_out)
        if abs(self.gamma_in + self.gamma_out - self.gamma) > 1e-12 * self.gamma:
            raise InvalidParameterError("gamma_in + gamma_out must equal gamma",
                                        gamma=self.gamma,
                                        gamma_in=self.gamma_in, gamma_out=self.gamma_out)

    @classmethod
    def symmetric(cls, gamma: float, omega0: float = 0.0) -> 'EmitterParams':
        return cls(omega0, gamma, gamma / 2.0, gamma - gamma / 2.0)

    @classmethod
    def closed(cls, omega0: float = 0.0) -> 'EmitterParams':
        return cls(omega0, 0.0, 0.0, 0.0)

    @property
    def is_closed(self) -> bool:
        return self.gamma == 0

    def require_decay(self, what: str) -> None:
        if self.is_closed:
            raise InvalidParameterError(f"{what} needs gamma > 0")

    @property
    def coupling(self) -> float:
        return math.sqrt(self.gamma_in * self.gamma_out)


@dataclass
class SidebandScattering:
    nu_grid: np.ndarray
    p_range: np.ndarray
    amplitudes: np.ndarray = field(repr=False)
    transmission: np.ndarray = field(repr=False)


@dataclass
class WavepacketSpectrum:
    """Single-photon amplitude on a uniform frequency grid"""

    omega_grid: np.ndarray
    amplitude: np.ndarray = field(repr=False)

    @property
    def spacing(self) -> float:
        return float(self.omega_grid[1] - self.omega_grid[0])

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.spacing)


@dataclass
class EmissionSpectrum:
    """Spontaneous-emission intensity: a comb of unit-area Lorentzians"""

    omega_grid: np.ndarray
    intensity: np.ndarray = field(repr=False)
    line_positions: np.ndarray = field(repr=False)
    line_weights: np.ndarray = field(repr=False)

    @property
    def area(self) -> float:
        # exact area; a grid quadrature misses the Lorentzian tails
        return float(np.sum(self.line_weights))


class SweepAxis(Enum):
    FUNDAMENTAL = "fundamental"
    AMPLITUDE = "amplitude"
    SCALED = "scaled"


@dataclass
class SpectrumMap:
    axis: SweepAxis
    sweep_values: np.ndarray
    omega_grid: np.ndarray
    raw: np.ndarray = field(repr=False)

    @property
    def normalized(self) -> np.ndarray:
        peaks = self.raw.max(axis=1, keepdims=True)
        peaks[peaks == 0] = 1.0
        return self.raw / peaks


def _lorentz_denominators(e: EmitterParams, a: PhaseFactorSpectrum, M: int, nu) -> np.ndarray:
    lines = e.omega0 + np.arange(-M, M + 1) * a.fundamental
    return 1.0 / (e.gamma / 2.0 + 1j * np.subtract.outer(lines, nu))


def effective_p_window(a: PhaseFactorSpectrum, p_window: Optional[int] = None) -> int:
    """Smallest window that holds every nonzero S_p, or the requested one if wider"""
    needed = 2 * a.max_index
    if p_window is None:
        return needed
    if p_window < needed:
        logger.info(
            "Widening sideband window",
            extra={'extra_fields': {'requested': p_window, 'effective': needed}}
        )
        return needed
    return int(p_window)


def _amplitude_matrix(e: EmitterParams, a: PhaseFactorSpectrum, p_values: np.ndarray,
                      nu: np.ndarray) -> np.ndarray:
    e.require_decay("sideband scattering")
    M = a.max_index
    P = int(np.max(np.abs(p_values))) if p_values.size else 0
    padded = a.padded(M + P)
    alpha = a.coefficients
    # pair[p, m] = α_m*·α_{m+p}
    m_offset = np.arange(2 * M + 1) + P
    pair = np.conj(alpha)[None, :] * padded[m_offset[None, :] + p_values[:, None]]
    return -e.coupling * (pair @ _lorentz_denominators(e, a, M, nu))


def sideband_amplitude(e: EmitterParams, a: PhaseFactorSpectrum, p: int, nu):
    """S_p(ν) for one sideband index; ν may be a scalar or an array"""
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    values = _amplitude_matrix(e, a, np.array([int(p)]), nu_arr)[0]
    return values if np.ndim(nu) else complex(values[0])


def sideband_scattering(e: EmitterParams, a: PhaseFactorSpectrum, nu_grid,
                        p_window: Optional[int] = None) -> SidebandScattering:
    nu = np.asarray(nu_grid, dtype=float)
    window = effective_p_window(a, p_window)
    p_values = np.arange(-window, window + 1)
    amplitudes = _amplitude_matrix(e, a, p_values, nu)
    return SidebandScattering(nu, p_values, amplitudes, np.sum(np.abs(amplitudes) ** 2, axis=0))


def transmission(e: EmitterParams, a: PhaseFactorSpectrum, nu, p_window: Optional[int] = None):
    """T(ν) = Σ_p |S_p(ν)|² over the effective sideband window"""
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    values = sideband_scattering(e, a, nu_arr, p_window).transmission
    return values if np.ndim(nu) else float(values[0])


def quasistatic_transmission(e: EmitterParams, w: ModulationWaveform, nu,
                             samples: int = QUASISTATIC_SAMPLES):
    """Period average of the instantaneous Lorentzian response, the Ω ≪ γ limit"""
    e.require_decay("quasistatic transmission")
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    t = w.period * np.arange(samples) / samples
    shift = np.asarray(eval_delta(w, t))
    detuning = e.omega0 + shift[:, None] - nu_arr[None, :]
    response = e.gamma_in * e.gamma_out / ((e.gamma / 2.0) ** 2 + detuning ** 2)
    values = response.mean(axis=0)
    return values if np.ndim(nu) else float(values[0])


def gaussian_wavepacket(omega_grid, center: float, fwhm: float) -> WavepacketSpectrum:
    """Gaussian amplitude whose intensity has the given FWHM, normalised on the grid"""
    grid = np.asarray(omega_grid, dtype=float)
    if fwhm <= 0:
        raise InvalidParameterError("wavepacket FWHM must be positive", fwhm=fwhm)
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    amplitude = np.exp(-((grid - center) ** 2) / (4.0 * sigma ** 2)).astype(complex)
    packet = WavepacketSpectrum(grid, amplitude)
    packet.amplitude /= math.sqrt(packet.norm)
    return packet


def _shifted(values: np.ndarray, grid: np.ndarray, shift: float) -> np.ndarray:
    """values(ω − shift) on the same grid, zero outside"""
    step = grid[1] - grid[0]
    ratio = shift / step
    n = int(round(ratio))
    if abs(ratio - n) < 1e-9:
        out = np.zeros_like(values)
        if abs(n) >= len(values):
            return out
        if n >= 0:
            out[n:] = values[:len(values) - n]
        else:
            out[:n] = values[-n:]
        return out
    source = grid - shift
    return (np.interp(source, grid, values.real, left=0.0, right=0.0)
            + 1j * np.interp(source, grid, values.imag, left=0.0, right=0.0))


def scatter_wavepacket(e: EmitterParams, a: PhaseFactorSpectrum,
                       psi_in: WavepacketSpectrum,
                       p_window: Optional[int] = None) -> WavepacketSpectrum:
    """
    Output photon ψ_out(ω) = Σ_p S_p(ω − pΩ)·ψ_in(ω − pΩ) on the input grid.

    Sideband shifts that are whole multiples of the grid step are applied as
    exact index shifts; other shifts are linearly interpolated.

    Raises:
        ResolutionError: grid step coarser than γ/20
    """
    e.require_decay("wavepacket scattering")
    grid = psi_in.omega_grid
    step = psi_in.spacing
    if step > e.gamma / RESOLUTION_FRACTION:
        raise ResolutionError("frequency grid too coarse to resolve the emitter line",
                              step=step, required=e.gamma / RESOLUTION_FRACTION)
    window = effective_p_window(a, p_window)
    p_values = np.arange(-window, window + 1)
    amplitudes = _amplitude_matrix(e, a, p_values, grid)
    out = np.zeros_like(psi_in.amplitude, dtype=complex)
    for row, p in zip(amplitudes, p_values):
        out += _shifted(row * psi_in.amplitude, grid, p * a.fundamental)
    return WavepacketSpectrum(grid.copy(), out)


def floquet_emission_spectrum(e: EmitterParams, a: PhaseFactorSpectrum, omega_grid,
                              transition_offsets: Optional[Sequence[float]] = None,
                              transition_weights: Optional[Sequence[float]] = None) -> EmissionSpectrum:
    """
    Emission spectrum Σ_m |α_m|²·L(ω − ω₀ − mΩ), L of FWHM γ and unit area.

    With transition offsets each optical line carries its own comb, weighted
    by the normalised transition weights.
    """
    e.require_decay("emission spectrum")
    grid = np.asarray(omega_grid, dtype=float)
    offsets = np.zeros(1) if transition_offsets is None else np.asarray(transition_offsets, float)
    if transition_weights is None:
        line_share = np.full(len(offsets), 1.0 / len(offsets))
    else:
        line_share = np.asarray(transition_weights, dtype=float)
        if line_share.shape != offsets.shape or np.any(line_share < 0) or line_share.sum() <= 0:
            raise InvalidParameterError("transition weights must be non-negative and match offsets")
        line_share = line_share / line_share.sum()

    positions = (e.omega0 + offsets[:, None] + a.indices[None, :] * a.fundamental).ravel()
    weights = (line_share[:, None] * a.weights[None, :]).ravel()
    half = e.gamma / 2.0
    profile = (half / math.pi) / ((grid[None, :] - positions[:, None]) ** 2 + half ** 2)
    intensity = weights @ profile
    return EmissionSpectrum(grid, intensity, positions, weights)


def _swept_waveform(base: ModulationWaveform, axis: SweepAxis, value: float) -> ModulationWaveform:
    if axis is SweepAxis.FUNDAMENTAL:
        return ModulationWaveform(value, base.harmonics)
    if axis is SweepAxis.SCALED:
        return base.scaled(value / base.fundamental)
    amplitude = nominal_amplitude(base)
    if amplitude == 0:
        raise InvalidParameterError("amplitude sweep needs a waveform with nonzero shape")
    ratio = value / amplitude
    return ModulationWaveform(base.fundamental, tuple((k, c * ratio) for k, c in base.harmonics))


def spectrum_map(e: EmitterParams, base: ModulationWaveform, axis: SweepAxis,
                 sweep_values, omega_grid, workers: Optional[int] = None) -> SpectrumMap:
    """
    Emission spectra along a drive sweep, one row per sweep value.

    FUNDAMENTAL keeps the harmonic amplitudes and changes Ω, AMPLITUDE
    rescales the harmonics to a nominal peak Σ2|c_k| and keeps Ω, SCALED
    changes Ω with every c_k/Ω held fixed.
    """
    values = np.asarray(sweep_values, dtype=float)
    if values.size == 0:
        raise InvalidParameterError("sweep grid is empty")
    if axis is SweepAxis.AMPLITUDE:
        if np.any(values < 0):
            raise InvalidParameterError("amplitudes must be non-negative")
    elif np.any(values <= 0):
        raise InvalidParameterError("swept fundamentals must be positive")
    grid = np.asarray(omega_grid, dtype=float)

    def row(value: float) -> np.ndarray:
        w = _swept_waveform(base, axis, float(value))
        return floquet_emission_spectrum(e, phase_factor_spectrum(w), grid).intensity

    raw = np.vstack(parallel_map(row, values, workers))
    logger.info(
        "Spectrum map computed",
        extra={'extra_fields': {'axis': axis.value, 'rows': len(values), 'columns': len(grid)}}
    )
    return SpectrumMap(axis, values, grid, raw)
