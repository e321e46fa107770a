"""
Lindblad master-equation engine for the modulated two-level emitter.

Works in the frame rotating at the laser frequency with

    H(t) = (Δ(t + φ/Ω) − δ_L)·σ†σ + (Ω_R(t)/2)·(σ + σ†)

and radiative decay γ on σ. The density matrix is carried as the real
vector v = [ρ_gg, ρ_ee, Re ρ_eg, Im ρ_eg]. Several trajectories that share
a waveform and an envelope shape can be integrated together as a
DriveBatch; each member has its own modulation phase, laser detuning and
envelope scale, and the stacked (4, B) state goes through one solve_ivp call.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, IntegratorError, InvalidParameterError
from .logging_config import get_logger
from .scattering import EmitterParams
from .waveform import ModulationWaveform

logger = get_logger(__name__)

RTOL = 1e-10
ATOL = 1e-12
STEPS_PER_SCALE = 200
INVARIANT_TOLERANCE = 1e-7
PULSE_TRUNCATION = 5.0
STEADY_STATE_TOLERANCE = 1e-10
MIN_STEADY_STATE_PERIODS = 10_000

GROUND = np.array([1.0, 0.0, 0.0, 0.0])
EXCITED = np.array([0.0, 1.0, 0.0, 0.0])


@dataclass(frozen=True)
class DensityMatrix2:
    rho_gg: float
    rho_ee: float
    rho_eg: complex = 0j

    @classmethod
    def ground(cls) -> 'DensityMatrix2':
        return cls(1.0, 0.0)

    @classmethod
    def excited(cls) -> 'DensityMatrix2':
        return cls(0.0, 1.0)

    @classmethod
    def from_vector(cls, v) -> 'DensityMatrix2':
        return cls(float(v[0]), float(v[1]), complex(v[2], v[3]))

    def to_vector(self) -> np.ndarray:
        return np.array([self.rho_gg, self.rho_ee, self.rho_eg.real, self.rho_eg.imag])

    @property
    def rho_ge(self) -> complex:
        return self.rho_eg.conjugate()

    @property
    def matrix(self) -> np.ndarray:
        """2×2 matrix in the (g, e) basis"""
        return np.array([[self.rho_gg, self.rho_ge], [self.rho_eg, self.rho_ee]])

    @property
    def trace(self) -> float:
        return self.rho_gg + self.rho_ee

    @property
    def min_eigenvalue(self) -> float:
        return float(_min_eigenvalue(self.to_vector()))

    def validate(self, tolerance: float = 1e-9) -> None:
        if abs(self.trace - 1.0) > tolerance:
            raise InvalidParameterError("density matrix trace must be 1", trace=self.trace)
        if self.min_eigenvalue < -tolerance:
            raise InvalidParameterError("density matrix must be positive",
                                        min_eigenvalue=self.min_eigenvalue)


def _min_eigenvalue(v: np.ndarray) -> np.ndarray:
    half_trace = 0.5 * (v[0] + v[1])
    radius = np.sqrt((0.5 * (v[0] - v[1])) ** 2 + v[2] ** 2 + v[3] ** 2)
    return half_trace - radius


@dataclass(frozen=True)
class ConstantDrive:
    """Continuous-wave Rabi amplitude Ω_R in rad/s"""

    rabi: float

    def __post_init__(self):
        if self.rabi < 0:
            raise InvalidParameterError("Rabi amplitude must be non-negative", rabi=self.rabi)

    @property
    def continuous(self) -> bool:
        return True

    def value(self, t: float) -> float:
        return self.rabi

    def step_scale(self) -> float:
        return math.inf


@dataclass(frozen=True)
class GaussianPulse:
    """
    Gaussian Rabi envelope with pulse area Θ = ∫Ω_R dt.

    The envelope is cut at ±5·fwhm around the centre and the peak is chosen
    so that the truncated pulse still has area Θ.
    """

    center: float
    fwhm: float
    area: float
    detuning: float = 0.0

    def __post_init__(self):
        if not self.fwhm > 0:
            raise InvalidParameterError("pulse FWHM must be positive", fwhm=self.fwhm)
        if self.area < 0:
            raise InvalidParameterError("pulse area must be non-negative", area=self.area)

    @property
    def continuous(self) -> bool:
        return False

    @property
    def sigma(self) -> float:
        return self.fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))

    @property
    def start(self) -> float:
        return self.center - PULSE_TRUNCATION * self.fwhm

    @property
    def end(self) -> float:
        return self.center + PULSE_TRUNCATION * self.fwhm

    @property
    def peak(self) -> float:
        half_width = PULSE_TRUNCATION * self.fwhm
        covered = self.sigma * math.sqrt(2.0 * math.pi) * math.erf(half_width / (self.sigma * math.sqrt(2.0)))
        return self.area / covered

    def value(self, t: float) -> float:
        if t < self.start or t > self.end:
            return 0.0
        x = (t - self.center) / self.sigma
        return self.peak * math.exp(-0.5 * x * x)

    def step_scale(self) -> float:
        return self.fwhm


Envelope = Union[ConstantDrive, GaussianPulse]


@dataclass(frozen=True)
class DriveSpec:
    """
    Drive of a single trajectory.

    The laser detuning defaults to the carrier detuning of a Gaussian pulse
    and to resonance for a continuous drive.
    """

    waveform: ModulationWaveform
    envelope: Envelope
    phase: float = 0.0
    laser_detuning: Optional[float] = None

    @property
    def detuning(self) -> float:
        if self.laser_detuning is not None:
            return self.laser_detuning
        return getattr(self.envelope, 'detuning', 0.0)


@dataclass
class DriveBatch:
    """Members sharing a waveform and envelope shape, integrated side by side"""

    waveform: ModulationWaveform
    envelope: Envelope
    phases: np.ndarray
    detunings: np.ndarray
    scales: np.ndarray
    _phased: np.ndarray = field(init=False, repr=False)
    _omega_k: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.phases = np.mod(np.atleast_1d(np.asarray(self.phases, dtype=float)), 2.0 * math.pi)
        size = self.phases.size
        self.detunings = np.broadcast_to(np.asarray(self.detunings, dtype=float), (size,)).copy()
        self.scales = np.broadcast_to(np.asarray(self.scales, dtype=float), (size,)).copy()
        ks, cs = self.waveform.arrays()
        # c_k·exp(−ikφ) per member, shape (K, B)
        self._phased = cs[:, None] * np.exp(-1j * np.outer(ks, self.phases))
        self._omega_k = ks * self.waveform.fundamental

    @classmethod
    def from_spec(cls, d: DriveSpec, copies: int = 1) -> 'DriveBatch':
        return cls(d.waveform, d.envelope, np.full(copies, d.phase),
                   np.full(copies, d.detuning), np.ones(copies))

    @property
    def size(self) -> int:
        return self.phases.size

    def repeated(self, copies: int) -> 'DriveBatch':
        """Each member repeated `copies` times in a row"""
        return DriveBatch(self.waveform, self.envelope,
                          np.repeat(self.phases, copies),
                          np.repeat(self.detunings, copies),
                          np.repeat(self.scales, copies))

    def delta(self, t: float) -> np.ndarray:
        """Δ(t + φ/Ω) per member"""
        if self._omega_k.size == 0:
            return np.zeros(self.size)
        carrier = np.exp(-1j * np.mod(self._omega_k * t, 2.0 * math.pi))
        return 2.0 * np.real(carrier @ self._phased)

    def effective_detuning(self, t: float) -> np.ndarray:
        return self.delta(t) - self.detunings

    def rabi(self, t: float) -> np.ndarray:
        return self.scales * self.envelope.value(t)


def lindblad_rhs(t: float, v: np.ndarray, batch: DriveBatch, gamma: float) -> np.ndarray:
    """Time derivative of the stacked state, flattened from shape (4, B)"""
    gg, ee, x, y = v.reshape(4, -1)
    detuning = batch.effective_detuning(t)
    rabi = batch.rabi(t)
    pump = rabi * y
    decay = gamma * ee
    return np.concatenate([
        decay + pump,
        -decay - pump,
        -0.5 * gamma * x + detuning * y,
        0.5 * rabi * (ee - gg) - detuning * x - 0.5 * gamma * y,
    ])


def step_cap(batch: DriveBatch, e: EmitterParams, span: float,
             dt_max: Optional[float] = None) -> float:
    """min(period/200, 1/(200γ), fwhm/200, dt_max), or span/200 if nothing sets a scale"""
    scales = [batch.envelope.step_scale()]
    if not batch.waveform.is_zero():
        scales.append(batch.waveform.period)
    if e.gamma > 0:
        scales.append(1.0 / e.gamma)
    cap = min(scales) / STEPS_PER_SCALE
    if not math.isfinite(cap):
        cap = span / STEPS_PER_SCALE
    if dt_max is not None:
        cap = min(cap, dt_max)
    return cap


def _solve(rhs, v0: np.ndarray, t0: float, t1: float, t_eval, max_step: float,
           atol: float = ATOL):
    solution = solve_ivp(rhs, (t0, t1), v0, method='DOP853', t_eval=t_eval,
                         rtol=RTOL, atol=atol, max_step=max_step)
    if not solution.success:
        raise IntegratorError("master-equation integration failed",
                              diagnostic=solution.message, t0=t0, t1=t1)
    return solution


def propagate_batch(v0: np.ndarray, batch: DriveBatch, e: EmitterParams, t0: float, t1: float,
                    t_eval: Optional[Sequence[float]] = None, dt_max: Optional[float] = None,
                    check_invariants: bool = True,
                    atol: float = ATOL) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate a batch of states from t0 to t1.

    Args:
        v0: initial states, shape (4, B)
        t_eval: sample times (defaults to the end point only)
        check_invariants: verify trace and positivity of every sample
        atol: absolute tolerance, lowered for weak-drive populations

    Returns:
        (t, states) with states of shape (4, B, len(t))
    """
    if not t1 > t0:
        raise InvalidParameterError("propagation window must have t1 > t0", t0=t0, t1=t1)
    v0 = np.asarray(v0, dtype=float).reshape(4, batch.size)
    if t_eval is None:
        t_eval = np.array([t1])
    t_eval = np.asarray(t_eval, dtype=float)
    max_step = step_cap(batch, e, t1 - t0, dt_max)

    def rhs(t, v):
        return lindblad_rhs(t, v, batch, e.gamma)

    solution = _solve(rhs, v0.ravel(), t0, t1, t_eval, max_step, atol)
    states = solution.y.reshape(4, batch.size, -1)
    if check_invariants:
        _check_invariants(v0, states)
    return solution.t, states


def _check_invariants(v0: np.ndarray, states: np.ndarray) -> None:
    initial_trace = (v0[0] + v0[1])[:, None]
    scale = np.maximum(np.abs(initial_trace), 1e-300)
    trace_error = np.max(np.abs(states[0] + states[1] - initial_trace) / scale)
    negativity = np.max(-_min_eigenvalue(states) / scale)
    if trace_error > INVARIANT_TOLERANCE or negativity > INVARIANT_TOLERANCE:
        raise IntegratorError("density-matrix invariant violated",
                              trace_error=float(trace_error), negativity=float(negativity))


def propagator_batch(batch: DriveBatch, e: EmitterParams, t0: float, t1: float,
                     t_eval: Optional[Sequence[float]] = None,
                     dt_max: Optional[float] = None,
                     atol: float = ATOL) -> Tuple[np.ndarray, np.ndarray]:
    """
    Transfer matrices P(t, t0) of every batch member.

    Returns:
        (t, P) with P of shape (B, len(t), 4, 4), so that v(t) = P·v(t0)
    """
    expanded = batch.repeated(4)
    basis = np.tile(np.eye(4), (1, batch.size))
    t, states = propagate_batch(basis, expanded, e, t0, t1, t_eval, dt_max,
                                check_invariants=False, atol=atol)
    # states[i, 4b + j, n] is component i of the image of basis vector j
    P = states.reshape(4, batch.size, 4, -1).transpose(1, 3, 0, 2)
    return t, P


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray = field(repr=False)

    @property
    def rho_gg(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def rho_ee(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def rho_eg(self) -> np.ndarray:
        return self.states[:, 2] + 1j * self.states[:, 3]

    def density_matrix(self, index: int) -> DensityMatrix2:
        return DensityMatrix2.from_vector(self.states[index])

    def rows(self):
        """(t_s, rho_ee, re_rho_ge, im_rho_ge) rows"""
        for t, v in zip(self.t, self.states):
            yield float(t), float(v[1]), float(v[2]), float(-v[3])


def propagate(rho0: DensityMatrix2, d: DriveSpec, e: EmitterParams, t0: float, t1: float,
              dt_max: Optional[float] = None,
              t_eval: Optional[Sequence[float]] = None,
              samples: int = 401) -> Trajectory:
    """
    Evolve one density matrix under the drive.

    Raises:
        IntegratorError: solver failure, or trace/positivity off by more than 1e-7
    """
    rho0.validate()
    if t_eval is None:
        t_eval = np.linspace(t0, t1, samples)
    batch = DriveBatch.from_spec(d)
    t, states = propagate_batch(rho0.to_vector()[:, None], batch, e, t0, t1, t_eval, dt_max)
    return Trajectory(t, states[:, 0, :].T)


@dataclass
class PeriodicSteadyState:
    """Limit cycle of a continuously driven emitter, sampled over one period"""

    t: np.ndarray
    states: np.ndarray = field(repr=False)
    period: float
    monodromy: np.ndarray = field(repr=False)
    periods_iterated: int
    residual: float

    @property
    def rho_ee(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def mean_excited(self) -> float:
        return float(np.mean(self.rho_ee))

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    def trajectory(self) -> Trajectory:
        return Trajectory(self.t, self.states)


def drive_period(waveform: ModulationWaveform, e: EmitterParams) -> float:
    """Modulation period, or 2π/γ as the reference period of an unmodulated drive"""
    if waveform.is_zero():
        e.require_decay("an unmodulated reference period")
        return 2.0 * math.pi / e.gamma
    return waveform.period


def iterate_to_fixed_point(monodromy: np.ndarray, max_iterations: int,
                           tolerance: float = STEADY_STATE_TOLERANCE) -> Tuple[np.ndarray, int, float]:
    """
    Period-to-period iteration from the ground state.

    Once converged, the fixed point is refined by solving (M − 1)v = 0 with
    unit trace, which keeps weak-drive populations of order 1e-6 accurate to
    many more digits than the absolute iteration tolerance.
    """
    v = GROUND.copy()
    residual = math.inf
    for iteration in range(1, max_iterations + 1):
        nxt = monodromy @ v
        residual = float(np.max(np.abs(nxt - v)))
        v = nxt
        if residual < tolerance:
            break
    else:
        raise ConvergenceError("periodic steady state did not converge",
                               periods=max_iterations, residual=residual)

    system = monodromy - np.eye(4)
    system[0] = [1.0, 1.0, 0.0, 0.0]
    rhs = np.zeros(4)
    rhs[0] = 1.0
    try:
        refined = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return v, iteration, residual
    refined_residual = float(np.max(np.abs(monodromy @ refined - refined)))
    if refined_residual <= residual:
        return refined, iteration, refined_residual
    return v, iteration, residual


def periodic_steady_state(d: DriveSpec, e: EmitterParams, samples: int = 256,
                          dt_max: Optional[float] = None) -> PeriodicSteadyState:
    """
    Periodic steady state of a CW-driven emitter.

    The one-period transfer matrix is applied to the ground state until two
    successive periods differ by less than 1e-10, then the converged state
    is propagated across one period and sampled.

    Raises:
        ConvergenceError: residual still above tolerance after
            max(10⁴ periods, 100/γ) of evolution
    """
    if not d.envelope.continuous:
        raise InvalidParameterError("periodic steady state needs a continuous drive")
    e.require_decay("periodic steady state")
    period = drive_period(d.waveform, e)
    batch = DriveBatch.from_spec(d)
    _, P = propagator_batch(batch, e, 0.0, period, dt_max=dt_max)
    monodromy = P[0, -1]
    max_periods = max(MIN_STEADY_STATE_PERIODS, int(math.ceil(100.0 / (e.gamma * period))))
    start, periods, residual = iterate_to_fixed_point(monodromy, max_periods)

    t_eval = period * np.arange(samples) / samples
    t, states = propagate_batch(start[:, None], batch, e, 0.0, period,
                                np.append(t_eval, period), dt_max)
    logger.debug(
        "Periodic steady state converged",
        extra={'extra_fields': {'periods': periods, 'residual': residual}}
    )
    return PeriodicSteadyState(t[:-1], states[:, 0, :-1].T, period, monodromy, periods, residual)
