"""
Master-equation trajectory task.
"""

from typing import Any, Dict

import numpy as np

from ..artifacts import ArtifactWriter
from ..config import RunConfig
from ..dynamics import (
    ConstantDrive, DensityMatrix2, DriveSpec, GaussianPulse, periodic_steady_state, propagate,
)
from .base import BaseTaskHandler

TRAJECTORY_HEADER = ['t_s', 'rho_ee', 're_rho_ge', 'im_rho_ge']


class DynamicsTaskHandler(BaseTaskHandler):
    """Population and coherence of a single driven trajectory"""

    def handle_trajectory(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        e, w, opts = cfg.emitter(), cfg.waveform(), cfg.options
        if opts['rabi'] is not None:
            envelope = ConstantDrive(opts['rabi'])
        else:
            envelope = GaussianPulse(opts['pulse_center'], opts['pulse_fwhm'], opts['pulse_area'],
                                     opts['laser_detuning'])
        d = DriveSpec(w, envelope, opts['phase'], opts['laser_detuning'])

        start = DensityMatrix2.ground()
        summary: Dict[str, Any] = {}
        if opts['steady_state']:
            steady = periodic_steady_state(d, e)
            writer.write_csv('steady_state.csv', TRAJECTORY_HEADER, steady.trajectory().rows())
            start = DensityMatrix2.from_vector(steady.initial_state)
            lead = float(np.mod(opts['t_start'], steady.period))
            if lead > 0:
                # carry the limit cycle forward to the phase of t_start
                start = propagate(start, d, e, 0.0, lead, t_eval=[lead]).density_matrix(-1)
            summary.update({
                'steady_state_mean_excited': steady.mean_excited,
                'steady_state_periods': steady.periods_iterated,
                'steady_state_residual': steady.residual,
            })

        trajectory = propagate(start, d, e, opts['t_start'], opts['t_end'], samples=opts['samples'])
        writer.write_csv('trajectory.csv', TRAJECTORY_HEADER, trajectory.rows())
        summary.update({
            'max_excited': float(np.max(trajectory.rho_ee)),
            'final_excited': float(trajectory.rho_ee[-1]),
        })
        return summary
