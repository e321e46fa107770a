"""
Ramsey interference task.
"""

from typing import Any, Dict

import numpy as np

from ..artifacts import ArtifactWriter
from ..config import RunConfig
from ..ramsey import contrast_sweep, fringe_scan
from .base import BaseTaskHandler


class RamseyTaskHandler(BaseTaskHandler):
    """Contrast against modulation frequency, with an optional fine fringe scan"""

    def handle_ramsey(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        opts = cfg.options
        gamma = cfg.emitter().gamma if opts['decay'] else 0.0
        fundamentals = self.grid(opts['omega_min'], opts['omega_max'], opts['omega_points'])
        result = contrast_sweep(opts['amplitude'], opts['t_delay'], fundamentals,
                                n_phases=opts['n_phases'], gamma=gamma,
                                workers=self.resolve_workers(cfg))
        writer.write_csv('contrast.csv', ['omega_hz', 't_delay_s', 'contrast', 'p_e_min', 'p_e_max'],
                         result.rows())
        writer.write_csv('cross_check.csv', ['omega_hz', 'contrast_analytic', 'contrast_simulated'],
                         ((self.to_hz(omega), analytic, simulated)
                          for omega, analytic, simulated in result.cross_check))
        summary: Dict[str, Any] = {
            'min_contrast': float(np.min(result.contrast)),
            'omega_hz_at_min': float(self.to_hz(fundamentals[int(np.argmin(result.contrast))])),
            'cross_check_max_deviation': result.max_deviation,
        }

        if opts['fringe_omega'] is not None:
            window = opts['fringe_window']
            if window is None:
                reference = abs(opts['fringe_omega_ref'])
                window = 4.0 * np.pi / reference if reference > 0 else opts['t_delay']
            delays = self.grid(opts['t_delay'], opts['t_delay'] + window, opts['fringe_points'])
            fringe = fringe_scan(opts['fringe_omega_ref'], opts['amplitude'], opts['fringe_omega'],
                                 delays, opts['n_phases'], gamma)
            writer.write_csv('fringe.csv', ['t_delay_s', 'p_e_analytic', 'p_e_simulated'],
                             fringe.fringe_rows())
            summary['fringe_contrast'] = float(fringe.contrast[0])
        return summary
