"""
Periodic modulation waveforms and their phase-factor spectra.

A waveform is stored as a truncated Fourier series

    Δ(t) = Σ_k 2·Re(c_k·exp(−i k Ω t)),   k ≥ 1,

with Ω and every c_k in rad/s. The accumulated phase Φ(t) = ∫₀ᵗ Δ has a
closed form per harmonic, and the sideband amplitudes α_m are the Fourier
coefficients of exp(−iΦ(t)), computed by FFT on power-of-two grids that are
doubled until the aliased tail is below tolerance.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np

from .errors import ConvergenceError, InvalidParameterError
from .logging_config import get_logger

logger = get_logger(__name__)

TAIL_TOLERANCE = 1e-10
STABILITY_TOLERANCE = 1e-10
MIN_SAMPLES = 64
MAX_SAMPLES = 2 ** 22

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModulationWaveform:
    """Real periodic detuning Δ(t) with zero mean"""

    fundamental: float
    harmonics: Tuple[Tuple[int, complex], ...] = ()

    def __post_init__(self):
        if not np.isfinite(self.fundamental) or self.fundamental <= 0:
            raise InvalidParameterError("fundamental must be positive",
                                        fundamental=self.fundamental)
        cleaned = []
        seen = set()
        for k, c in self.harmonics:
            if int(k) != k or k < 1:
                raise InvalidParameterError("harmonic index must be an integer >= 1", k=k)
            if k in seen:
                raise InvalidParameterError("duplicate harmonic index", k=k)
            c = complex(c)
            if not (np.isfinite(c.real) and np.isfinite(c.imag)):
                raise InvalidParameterError("harmonic amplitude must be finite", k=k)
            seen.add(int(k))
            cleaned.append((int(k), c))
        object.__setattr__(self, 'harmonics', tuple(sorted(cleaned)))

    @property
    def period(self) -> float:
        return TWO_PI / self.fundamental

    @property
    def max_harmonic(self) -> int:
        return self.harmonics[-1][0] if self.harmonics else 0

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Harmonic indices and amplitudes as numpy arrays"""
        if not self.harmonics:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=complex)
        ks, cs = zip(*self.harmonics)
        return np.asarray(ks, dtype=int), np.asarray(cs, dtype=complex)

    def is_zero(self) -> bool:
        return all(c == 0 for _, c in self.harmonics)

    def scaled(self, kappa: float) -> 'ModulationWaveform':
        """Δ'(t) = κ·Δ(κt): fundamental and amplitudes both multiplied by κ"""
        if not np.isfinite(kappa) or kappa <= 0:
            raise InvalidParameterError("scale factor must be positive", kappa=kappa)
        return ModulationWaveform(self.fundamental * kappa,
                                  tuple((k, c * kappa) for k, c in self.harmonics))

    def to_dict(self) -> Dict[str, Any]:
        """Serialize in ordinary-frequency units (Hz)"""
        return {
            'omega_hz': self.fundamental / TWO_PI,
            'harmonics': [
                {'k': k, 're_hz': c.real / TWO_PI, 'im_hz': c.imag / TWO_PI}
                for k, c in self.harmonics
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ModulationWaveform':
        try:
            omega = float(data['omega_hz']) * TWO_PI
            harmonics = tuple(
                (int(h['k']), complex(float(h.get('re_hz', 0.0)), float(h.get('im_hz', 0.0))) * TWO_PI)
                for h in data.get('harmonics', [])
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidParameterError(f"malformed waveform description: {e}")
        return cls(omega, harmonics)


@dataclass(frozen=True)
class PhaseFactorSpectrum:
    """Fourier coefficients α_m of exp(−iΦ(t)) for m in [−M, M]"""

    fundamental: float
    coefficients: np.ndarray = field(repr=False)
    truncation_tail: float = 0.0
    samples: int = 0

    @property
    def max_index(self) -> int:
        return (len(self.coefficients) - 1) // 2

    @property
    def indices(self) -> np.ndarray:
        M = self.max_index
        return np.arange(-M, M + 1)

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def alpha(self, m: int) -> complex:
        M = self.max_index
        if abs(m) > M:
            return 0j
        return complex(self.coefficients[m + M])

    def padded(self, M: int) -> np.ndarray:
        """Coefficients on [−M, M], zero outside the stored range"""
        own = self.max_index
        if M <= own:
            return self.coefficients[own - M: own + M + 1]
        out = np.zeros(2 * M + 1, dtype=complex)
        out[M - own: M + own + 1] = self.coefficients
        return out


def sideband_weights(a: PhaseFactorSpectrum) -> Dict[int, float]:
    """|α_m|² keyed by sideband index"""
    return {int(m): float(weight) for m, weight in zip(a.indices, a.weights)}


def make_sine(amplitude: float, fundamental: float, phase: float = 0.0) -> ModulationWaveform:
    """Δ(t) = A·sin(Ωt + φ₀)"""
    if not np.isfinite(fundamental) or fundamental <= 0:
        raise InvalidParameterError("fundamental must be positive", fundamental=fundamental)
    if amplitude < 0:
        raise InvalidParameterError("amplitude must be non-negative", amplitude=amplitude)
    c1 = 0.5j * amplitude * np.exp(-1j * phase)
    return ModulationWaveform(fundamental, ((1, complex(c1)),))


def make_waveform(fundamental: float, coefficients: Iterable[complex]) -> ModulationWaveform:
    """Waveform from amplitudes c_1..c_K given in order"""
    return ModulationWaveform(fundamental, tuple((k + 1, c) for k, c in enumerate(coefficients)))


def time_reversed(w: ModulationWaveform) -> ModulationWaveform:
    """Δ(−t)"""
    return ModulationWaveform(w.fundamental, tuple((k, c.conjugate()) for k, c in w.harmonics))


def inverted(w: ModulationWaveform) -> ModulationWaveform:
    """−Δ(t)"""
    return ModulationWaveform(w.fundamental, tuple((k, -c) for k, c in w.harmonics))


def nominal_amplitude(w: ModulationWaveform) -> float:
    """Upper bound Σ 2|c_k| on |Δ(t)|"""
    return float(sum(2.0 * abs(c) for _, c in w.harmonics))


def eval_delta(w: ModulationWaveform, t) -> Any:
    """Instantaneous detuning Δ(t) in rad/s; accepts scalars or arrays"""
    ks, cs = w.arrays()
    t_arr = np.asarray(t, dtype=float)
    if ks.size == 0:
        return np.zeros_like(t_arr) if t_arr.ndim else 0.0
    # reduce the angle per harmonic so long times keep full precision
    theta = np.mod(np.multiply.outer(t_arr, ks * w.fundamental), TWO_PI)
    value = 2.0 * np.real(np.exp(-1j * theta) @ cs)
    return value if t_arr.ndim else float(value)


def _phase_on_angle(ks: np.ndarray, normalized: np.ndarray, theta) -> np.ndarray:
    """Φ as a function of θ = Ωt with amplitudes given in units of Ω"""
    theta = np.asarray(theta, dtype=float)
    if ks.size == 0:
        return np.zeros_like(theta)
    phases = np.exp(-1j * np.multiply.outer(theta, ks)) - 1.0
    return 2.0 * np.real(phases @ (1j * normalized / ks))


def accumulated_phase(w: ModulationWaveform, t) -> Any:
    """Φ(t) = ∫₀ᵗ Δ(t′)dt′ in radians, with Φ(0) = 0"""
    ks, cs = w.arrays()
    t_arr = np.asarray(t, dtype=float)
    theta = np.mod(t_arr * w.fundamental, TWO_PI)
    value = _phase_on_angle(ks, cs / w.fundamental, theta)
    # Φ is periodic because Δ has zero mean, so reducing θ is exact
    return value if t_arr.ndim else float(value)


def _dft_coefficients(ks: np.ndarray, normalized: np.ndarray, n: int) -> np.ndarray:
    theta = TWO_PI * np.arange(n) / n
    samples = np.exp(-1j * _phase_on_angle(ks, normalized, theta))
    return np.fft.ifft(samples)


def _outer_mass(alpha: np.ndarray) -> float:
    n = len(alpha)
    quarter = n // 4
    return float(np.sum(np.abs(alpha[quarter: n - quarter]) ** 2))


def _centered(alpha: np.ndarray, M: int) -> np.ndarray:
    return np.concatenate([alpha[len(alpha) - M:], alpha[:M + 1]])


def phase_factor_spectrum(w: ModulationWaveform,
                          tail_tolerance: float = TAIL_TOLERANCE,
                          max_samples: int = MAX_SAMPLES) -> PhaseFactorSpectrum:
    """
    Sideband amplitudes α_m of exp(−iΦ(t)).

    The sample count starts at 64 and doubles until the mass in the upper
    half of the frequency range is below the tail tolerance and the retained
    coefficients agree with the previous grid. The returned range [−M, M] is
    the smallest one whose outside mass is below the tolerance.

    Raises:
        ConvergenceError: the grid reached max_samples without converging
    """
    ks, cs = w.arrays()
    normalized = cs / w.fundamental

    n = MIN_SAMPLES
    previous = None
    tail = float('inf')
    while n <= max_samples:
        alpha = _dft_coefficients(ks, normalized, n)
        tail = _outer_mass(alpha)
        if tail < tail_tolerance and previous is not None:
            check = len(previous) // 4
            drift = float(np.max(np.abs(_centered(alpha, check) - _centered(previous, check))))
            if drift < STABILITY_TOLERANCE:
                break
        previous = alpha
        n *= 2
    else:
        raise ConvergenceError("phase-factor spectrum did not converge",
                               samples=max_samples, tail_mass=tail)

    weights = np.abs(alpha) ** 2
    total = float(np.sum(weights))
    # cumulative inside mass for increasing M
    half = n // 2
    M = 0
    inside = float(weights[0])
    while total - inside >= tail_tolerance and M < half - 1:
        M += 1
        inside += float(weights[M] + weights[n - M])
    coefficients = _centered(alpha, M)
    truncation_tail = max(total - inside, 0.0) + abs(1.0 - total)

    logger.debug(
        "Phase-factor spectrum converged",
        extra={'extra_fields': {'samples': n, 'max_index': M, 'tail_mass': truncation_tail}}
    )
    return PhaseFactorSpectrum(w.fundamental, coefficients, truncation_tail, n)


def waveform_timeseries(w: ModulationWaveform, sample_rate_hz: float,
                        duration_s: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Δ(t) sampled at a fixed rate over one period (or the given duration)"""
    if sample_rate_hz <= 0:
        raise InvalidParameterError("sample rate must be positive", sample_rate_hz=sample_rate_hz)
    duration = w.period if duration_s is None else duration_s
    count = max(int(round(duration * sample_rate_hz)), 1)
    t = np.arange(count) / sample_rate_hz
    return t, eval_delta(w, t)
