"""
Photon-correlation task.
"""

import logging
from typing import Any, Dict

import numpy as np

from ..artifacts import ArtifactWriter
from ..config import RunConfig
from ..correlations import correlation_map, cross_validate, g2_curve, g2_period_average, weak_drive
from ..logging_config import get_logger, log_with_context
from .base import BaseTaskHandler

logger = get_logger(__name__)


class CorrelationTaskHandler(BaseTaskHandler):
    """Weak-drive g²(τ), G(t, τ) and the time-bin cross-check"""

    def handle_g2(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        e, w, opts = cfg.emitter(), cfg.waveform(), cfg.options
        workers = self.resolve_workers(cfg)
        d = weak_drive(w, e, opts['epsilon'], opts['laser_detuning'], opts['phase'])
        tau = self.grid(0.0, opts['tau_max'], opts['tau_points'])

        curve = g2_curve(e, d, tau, t_samples=opts['t_samples'],
                         verify_weak_drive=opts['verify_weak_drive'], workers=workers)
        writer.write_csv('g2.csv', ['tau_s', 'g2', 'g2_transmission'],
                         zip(curve.tau_grid, curve.g2, curve.g2_transmission))
        summary = {
            'g2_zero': float(curve.g2[0]),
            'mean_intensity': curve.mean_intensity,
            'transmission_intensity': curve.transmission_intensity,
            'normalization': curve.normalization,
            'weak_drive_deviation': curve.weak_drive_deviation,
        }

        if opts['map']:
            cmap = correlation_map(e, d, tau, t_samples=opts['t_samples'], workers=workers)
            writer.write_csv('correlation_map.csv', ['t_s', 'tau_s', 'G'], cmap.rows())

        if opts['fold_settle'] is not None:
            folded = g2_period_average(curve, w.fundamental, settle_time=opts['fold_settle'])
            writer.write_csv('g2_folded.csv', ['tau_mod_s', 'g2', 'count'],
                             zip(folded.tau_mod, folded.g2_folded, folded.counts.tolist()))
            spread = float(np.nanmax(folded.g2_folded) - np.nanmin(folded.g2_folded))
            summary['folded_spread'] = spread

        if opts['cross_validate']:
            report = cross_validate(e, d)
            summary['cross_validation'] = {
                'deviation': report.deviation,
                'tolerance': report.tolerance,
                'within_tolerance': report.within_tolerance,
            }
            if not report.within_tolerance:
                log_with_context(logger, logging.WARNING, "Time-bin oracle disagrees beyond tolerance",
                                 task=cfg.task, deviation=report.deviation)
        return summary
