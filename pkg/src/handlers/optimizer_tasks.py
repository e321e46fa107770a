"""
Waveform inverse-design task.
"""

from typing import Any, Dict

import numpy as np

from ..artifacts import ArtifactWriter
from ..config import RunConfig
from ..logging_config import get_logger
from ..optimizer import OptimizerConfig, optimize_waveform, scale_waveform
from ..waveform import phase_factor_spectrum, waveform_timeseries
from .base import BaseTaskHandler

logger = get_logger(__name__)


class OptimizerTaskHandler(BaseTaskHandler):
    """Fits a waveform to a target sideband spectrum and exports it"""

    def handle_optimize(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        target, opts = cfg.target(), cfg.options
        settings = OptimizerConfig(
            fundamental=opts['omega'],
            max_harmonic=opts['max_harmonic'],
            restarts=opts['restarts'],
            seed=cfg.seed,
            gradient_step=opts['gradient_step'],
            tolerance=opts['tolerance'],
            leakage_weight=opts['leakage_weight'],
            match_phases=opts['match_phases'],
            max_iterations=opts['max_iterations'],
            bandwidth_cap=opts['bandwidth_cap'],
        )
        result = optimize_waveform(target, settings, self.resolve_workers(cfg))
        spectrum = result.spectrum

        writer.write_json('waveform.json', result.waveform.to_dict())
        window = max(spectrum.max_index, max(abs(p) for p in target.support))
        writer.write_csv(
            'achieved_spectrum.csv', ['p', 'weight', 'target_weight', 're_alpha', 'im_alpha'],
            ((p, abs(spectrum.alpha(p)) ** 2, target.weights.get(p, 0.0),
              spectrum.alpha(p).real, spectrum.alpha(p).imag)
             for p in range(-window, window + 1))
        )
        writer.write_csv('restarts.csv', ['restart', 'cost'], enumerate(result.restart_costs))

        summary: Dict[str, Any] = {
            'cost': result.cost,
            'converged': result.converged,
            'best_restart': result.best_restart,
            'achieved_weights': {str(p): abs(spectrum.alpha(p)) ** 2 for p in target.support},
            'in_support_weight': float(sum(abs(spectrum.alpha(p)) ** 2 for p in target.support)),
        }

        if opts['scale_factors']:
            deviations = []
            for i, kappa in enumerate(opts['scale_factors']):
                scaled = scale_waveform(result.waveform, kappa)
                scaled_spectrum = phase_factor_spectrum(scaled)
                width = max(scaled_spectrum.max_index, spectrum.max_index)
                deviations.append(float(np.max(np.abs(
                    np.abs(scaled_spectrum.padded(width)) - np.abs(spectrum.padded(width))))))
                writer.write_json(f'waveform_scaled_{i}.json', scaled.to_dict())
            summary['scale_factors'] = list(opts['scale_factors'])
            summary['scale_max_deviation'] = max(deviations)

        if opts['timeseries_rate'] is not None:
            # the field is a sample rate; undo the angular conversion
            t, delta = waveform_timeseries(result.waveform, self.to_hz(opts['timeseries_rate']))
            writer.write_csv('waveform_timeseries.csv', ['t_s', 'delta_hz'], zip(t, self.to_hz(delta)))
        return summary
