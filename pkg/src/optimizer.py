"""
Inverse design of the modulation waveform.

The optimisation variables are the real and imaginary parts of c_k/Ω for
k = 1..K. The cost compares the achieved sideband amplitudes |α_p| with the
target magnitudes √w_p over the target's support and penalises the
probability that leaks into sidebands outside it. Restarts run BFGS with
central finite-difference gradients from seeded random starting points.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, InvalidParameterError
from .logging_config import get_logger
from .parallel import parallel_map
from .waveform import ModulationWaveform, PhaseFactorSpectrum, make_waveform, phase_factor_spectrum

logger = get_logger(__name__)

PENALTY_COST = 10.0


@dataclass(frozen=True)
class SpectralTarget:
    """Desired sideband weights |α_p|², optionally with phases arg(α_p)"""

    weights: Dict[int, float]
    phases: Optional[Dict[int, float]] = None
    bandwidth: Optional[int] = None

    def __post_init__(self):
        if not self.weights:
            raise InvalidParameterError("target needs at least one sideband weight")
        if any(w < 0 for w in self.weights.values()):
            raise InvalidParameterError("target weights must be non-negative")
        total = sum(self.weights.values())
        if total > 1.0 + 1e-9:
            raise InvalidParameterError("target weights sum above 1", total=total)
        if self.bandwidth is not None and any(abs(p) > self.bandwidth for p in self.weights):
            raise InvalidParameterError("target sideband outside the declared bandwidth",
                                        bandwidth=self.bandwidth)
        if self.phases and not set(self.phases) <= set(self.weights):
            raise InvalidParameterError("phase targets must refer to weighted sidebands")

    @property
    def support(self) -> List[int]:
        return sorted(self.weights)

    def magnitudes(self) -> np.ndarray:
        return np.sqrt([self.weights[p] for p in self.support])

    @classmethod
    def from_dict(cls, data: dict) -> 'SpectralTarget':
        try:
            weights = {int(p): float(w) for p, w in data['weights'].items()}
            phases = data.get('phases')
            if phases is not None:
                phases = {int(p): float(v) for p, v in phases.items()}
        except (KeyError, AttributeError, TypeError, ValueError) as e:
            raise InvalidParameterError(f"malformed spectral target: {e}")
        return cls(weights, phases, data.get('bandwidth'))

    def to_dict(self) -> dict:
        data = {'weights': {str(p): self.weights[p] for p in self.support}}
        if self.phases:
            data['phases'] = {str(p): self.phases[p] for p in sorted(self.phases)}
        if self.bandwidth is not None:
            data['bandwidth'] = self.bandwidth
        return data


@dataclass(frozen=True)
class OptimizerConfig:
    fundamental: float
    max_harmonic: int = 4
    restarts: int = 20
    seed: int = 0
    gradient_step: float = 1e-6
    tolerance: float = 1e-6
    leakage_weight: float = 1.0
    match_phases: bool = False
    max_iterations: int = 400
    bandwidth_cap: Optional[float] = None

    def __post_init__(self):
        if not self.fundamental > 0:
            raise InvalidParameterError("fundamental must be positive", fundamental=self.fundamental)
        if self.max_harmonic < 1:
            raise InvalidParameterError("max_harmonic must be at least 1", max_harmonic=self.max_harmonic)
        if self.restarts < 1:
            raise InvalidParameterError("restarts must be at least 1", restarts=self.restarts)
        if self.bandwidth_cap is not None and \
                self.max_harmonic * self.fundamental > self.bandwidth_cap * (1 + 1e-12):
            raise InvalidParameterError("K·Ω exceeds the bandwidth cap",
                                        bandwidth=self.max_harmonic * self.fundamental,
                                        cap=self.bandwidth_cap)

    @property
    def parameter_count(self) -> int:
        return 2 * self.max_harmonic


@dataclass
class OptimizationResult:
    waveform: ModulationWaveform
    spectrum: PhaseFactorSpectrum
    cost: float
    converged: bool
    restart_costs: List[float] = field(default_factory=list)
    best_restart: int = 0
    params: np.ndarray = field(default=None, repr=False)


def params_to_waveform(params: np.ndarray, fundamental: float) -> ModulationWaveform:
    pairs = np.asarray(params, dtype=float).reshape(-1, 2)
    return make_waveform(fundamental, fundamental * (pairs[:, 0] + 1j * pairs[:, 1]))


def waveform_to_params(w: ModulationWaveform, max_harmonic: int) -> np.ndarray:
    params = np.zeros(2 * max_harmonic)
    for k, c in w.harmonics:
        if k > max_harmonic:
            raise InvalidParameterError("waveform has harmonics beyond max_harmonic", k=k)
        params[2 * (k - 1)] = c.real / w.fundamental
        params[2 * (k - 1) + 1] = c.imag / w.fundamental
    return params


def spectrum_cost(spectrum: PhaseFactorSpectrum, target: SpectralTarget,
                  leakage_weight: float = 1.0, match_phases: bool = False) -> float:
    support = target.support
    achieved = np.array([spectrum.alpha(p) for p in support])
    wanted = target.magnitudes()
    if match_phases and target.phases:
        phases = np.array([target.phases.get(p, 0.0) for p in support])
        goal = wanted * np.exp(1j * phases)
        overlap = np.vdot(achieved, goal)
        # best global phase of the achieved amplitudes
        rotation = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
        error = np.mean(np.abs(achieved * rotation - goal) ** 2)
    else:
        error = np.mean((np.abs(achieved) - wanted) ** 2)
    inside = float(np.sum(np.abs(achieved) ** 2))
    leaked = max(float(np.sum(spectrum.weights)) - inside, 0.0)
    return float(error + leakage_weight * leaked)


def cost(params: np.ndarray, target: SpectralTarget, fundamental: float = 1.0,
         leakage_weight: float = 1.0, match_phases: bool = False) -> float:
    """Sideband-magnitude MSE over the target support plus weighted leakage"""
    try:
        spectrum = phase_factor_spectrum(params_to_waveform(params, fundamental))
    except ConvergenceError:
        return PENALTY_COST
    return spectrum_cost(spectrum, target, leakage_weight, match_phases)


def initial_points(cfg: OptimizerConfig) -> List[np.ndarray]:
    """
    Starting points of all restarts.

    Restart 0 is the unmodulated waveform; the others draw every c_k
    uniformly from the disk |c_k| ≤ Ω with one spawned seed per restart.
    """
    points = [np.zeros(cfg.parameter_count)]
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    for child in children[1:]:
        rng = np.random.default_rng(child)
        radius = np.sqrt(rng.uniform(0.0, 1.0, cfg.max_harmonic))
        angle = rng.uniform(0.0, 2.0 * math.pi, cfg.max_harmonic)
        points.append(np.column_stack([radius * np.cos(angle), radius * np.sin(angle)]).ravel())
    return points


def _run_restart(x0: np.ndarray, target: SpectralTarget, cfg: OptimizerConfig) -> np.ndarray:
    def objective(x):
        return cost(x, target, 1.0, cfg.leakage_weight, cfg.match_phases)

    result = minimize(objective, x0, method='BFGS', jac='3-point',
                      options={'finite_diff_rel_step': cfg.gradient_step,
                               'maxiter': cfg.max_iterations,
                               'gtol': 1e-9})
    return result.x


def optimize_waveform(target: SpectralTarget, cfg: OptimizerConfig,
                      workers: Optional[int] = None) -> OptimizationResult:
    """
    Best-of-restarts BFGS fit of the waveform to the target spectrum.

    The returned cost is recomputed for every restart's end point and the
    winner is the lowest (cost, restart index). The result is flagged
    non-converged when no restart gets below cfg.tolerance.
    """
    starts = initial_points(cfg)
    finals = parallel_map(lambda x0: _run_restart(x0, target, cfg), starts, workers)
    costs = [cost(x, target, 1.0, cfg.leakage_weight, cfg.match_phases) for x in finals]
    best = min(range(len(costs)), key=lambda i: (costs[i], i))

    waveform = params_to_waveform(finals[best], cfg.fundamental)
    spectrum = phase_factor_spectrum(waveform)
    converged = costs[best] <= cfg.tolerance
    level = logger.info if converged else logger.warning
    level(
        "Waveform optimisation finished" if converged else
        "Waveform optimisation stagnated above tolerance",
        extra={'extra_fields': {'cost': costs[best], 'best_restart': best,
                                'restarts': len(costs), 'tolerance': cfg.tolerance}}
    )
    return OptimizationResult(waveform, spectrum, costs[best], converged, costs, best, finals[best])


def scale_waveform(w: ModulationWaveform, kappa: float) -> ModulationWaveform:
    """Ω → κΩ and c_k → κc_k; the sideband weights are unchanged"""
    return w.scaled(kappa)
