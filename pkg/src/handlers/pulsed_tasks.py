"""
Pulsed single-photon generation task.
"""

from typing import Any, Dict, List

import numpy as np

from ..artifacts import ArtifactWriter
from ..config import RunConfig
from ..logging_config import get_logger
from ..pulsed import PulsedFidelityResult, evaluate_pulses, pulse_width_sweep
from .base import BaseTaskHandler
from .dynamics_tasks import TRAJECTORY_HEADER

logger = get_logger(__name__)

SWEEP_HEADER = ['fwhm_s', 'phase_rad', 'area_rad', 'e_n', 'g2_pulse']


def _sweep_rows(results: List[PulsedFidelityResult]):
    for r in results:
        yield r.fwhm, r.phase, r.area, r.expected_photons, r.g2_pulse


class PulsedTaskHandler(BaseTaskHandler):
    """Phase/area optimisation per pulse width and phase scans at fixed area"""

    def handle_pulsed(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        e, w, opts = cfg.emitter(), cfg.waveform(), cfg.options
        workers = self.resolve_workers(cfg)
        summary: Dict[str, Any] = {}

        if opts['phase_scan_area'] is not None:
            fwhm = opts['fwhm'][0]
            points = opts['phase_scan_points'] if not w.is_zero() else 1
            phases = 2.0 * np.pi * np.arange(points) / points
            areas = np.full(points, opts['phase_scan_area'])
            photons, g2 = evaluate_pulses(e, w, fwhm, phases, areas, opts['detuning'], opts['tail'],
                                          workers=workers)
            writer.write_csv('phase_scan.csv', ['phase_rad', 'e_n', 'g2_pulse'], zip(phases, photons, g2))
            summary['phase_scan'] = {
                'fwhm_s': fwhm,
                'area_rad': opts['phase_scan_area'],
                'e_n_min': float(np.min(photons)),
                'e_n_max': float(np.max(photons)),
            }

        if not opts['optimize']:
            return summary

        search = {
            'phase_points': opts['phase_points'],
            'area_points': opts['area_points'],
            'area_max': opts['area_max'],
            'tail': opts['tail'],
            'photon_tolerance': opts['photon_tolerance'],
            'refine': opts['refine'],
            'workers': workers,
        }
        modulated, reference = pulse_width_sweep(e, w, opts['fwhm'], opts['detuning'],
                                                 include_reference=opts['reference'], **search)

        writer.write_csv('pulse_sweep.csv', SWEEP_HEADER, _sweep_rows(modulated))
        if reference:
            writer.write_csv('pulse_sweep_reference.csv', SWEEP_HEADER, _sweep_rows(reference))
        for i, result in enumerate(modulated):
            record = result.summary()
            if reference:
                record['reference'] = reference[i].summary()
            writer.write_json(f'pulse_{i}.json', record)
            if result.trajectory is not None:
                writer.write_csv(f'pulse_{i}_trajectory.csv', TRAJECTORY_HEADER, result.trajectory.rows())
            writer.write_csv(f'pulse_{i}_grid.csv', ['phase_rad', 'area_rad', 'e_n', 'g2_pulse'],
                             zip(result.grid_phases, result.grid_areas, result.grid_photons,
                                 result.grid_g2))

        summary['widths'] = [r.summary() for r in modulated]
        if reference:
            summary['reference'] = [r.summary() for r in reference]
            summary['max_relative_gap'] = max(
                abs(m.expected_photons - r.expected_photons) / r.expected_photons
                for m, r in zip(modulated, reference))
        return summary
