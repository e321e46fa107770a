"""
Spectrum, transmission and spectrum-map tasks.
"""

from typing import Any, Dict

import numpy as np

from ..artifacts import ArtifactWriter
from ..config import RunConfig
from ..logging_config import get_logger
from ..parallel import parallel_map
from ..scattering import (
    SweepAxis, effective_p_window, floquet_emission_spectrum, gaussian_wavepacket,
    quasistatic_transmission, scatter_wavepacket, sideband_scattering, spectrum_map,
)
from ..waveform import phase_factor_spectrum
from .base import TWO_PI, BaseTaskHandler

logger = get_logger(__name__)


class ScatteringTaskHandler(BaseTaskHandler):
    """Closed-form spectra of the modulated emitter"""

    def handle_spectrum(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        """Emission spectrum on a frequency grid plus the sideband table"""
        e, w, opts = cfg.emitter(), cfg.waveform(), cfg.options
        spectrum = phase_factor_spectrum(w)
        grid = self.grid(opts['omega_min'], opts['omega_max'], opts['points'])
        offsets = weights = None
        if opts['transitions']:
            offsets = [2.0 * np.pi * t['offset_hz'] for t in opts['transitions']]
            weights = [t['weight'] for t in opts['transitions']]
        result = floquet_emission_spectrum(e, spectrum, grid, offsets, weights)

        writer.write_csv('spectrum.csv', ['omega_hz', 'intensity'],
                         zip(self.to_hz(grid), result.intensity))
        writer.write_csv('sidebands.csv', ['m', 'weight', 'position_hz'],
                         ((int(m), weight, self.to_hz(e.omega0 + m * w.fundamental))
                          for m, weight in zip(spectrum.indices, spectrum.weights)))
        return {
            'area': result.area,
            'max_sideband': spectrum.max_index,
            'truncation_tail': spectrum.truncation_tail,
            'lines': len(result.line_positions),
        }

    def handle_transmission(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        """T(ν) and, optionally, every sideband amplitude S_p(ν)"""
        e, w, opts = cfg.emitter(), cfg.waveform(), cfg.options
        spectrum = phase_factor_spectrum(w)
        nu = self.grid(opts['nu_min'], opts['nu_max'], opts['points'])
        result = sideband_scattering(e, spectrum, nu, opts['p_window'])

        columns = [self.to_hz(nu), result.transmission]
        header = ['nu_hz', 'transmission']
        if opts['quasistatic']:
            header.append('quasistatic')
            columns.append(quasistatic_transmission(e, w, nu))
        writer.write_csv('transmission.csv', header, zip(*columns))

        if opts['sidebands']:
            def rows():
                for i, p in enumerate(result.p_range):
                    for j, value in enumerate(result.amplitudes[i]):
                        yield float(nu[j] / (2.0 * np.pi)), int(p), value.real, value.imag, abs(value) ** 2
            writer.write_csv('sidebands.csv', ['nu_hz', 'p', 're_s', 'im_s', 'probability'], rows())

        packet_norms = None
        if opts['wavepacket_fwhm'] is not None:
            packet_norms = self._wavepacket_map(cfg, e, spectrum, nu, opts, writer)

        return {
            'max_transmission': float(np.max(result.transmission)),
            'p_window': effective_p_window(spectrum, opts['p_window']),
            'truncation_tail': spectrum.truncation_tail,
            'wavepacket_max_norm': packet_norms,
        }

    def _wavepacket_map(self, cfg: RunConfig, e, spectrum, grid: np.ndarray, opts: Dict[str, Any],
                        writer: ArtifactWriter) -> float:
        """|ψ_out(ω)|² for Gaussian input photons centred along the ν axis"""
        centers = self.grid(grid[0], grid[-1], opts['wavepacket_centers'])

        def scatter(center):
            packet = gaussian_wavepacket(grid, center, opts['wavepacket_fwhm'])
            return scatter_wavepacket(e, spectrum, packet, opts['p_window'])

        outputs = parallel_map(scatter, centers, self.resolve_workers(cfg))

        def rows():
            for center, out in zip(centers, outputs):
                for omega, value in zip(grid, np.abs(out.amplitude) ** 2):
                    yield float(center / TWO_PI), float(omega / TWO_PI), value

        writer.write_csv('wavepacket_map.csv', ['nu_hz', 'omega_hz', 'intensity'], rows())
        return max(out.norm for out in outputs)

    def handle_map(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        """Row-normalised emission spectra along a drive sweep, with the raw intensities alongside"""
        e, w, opts = cfg.emitter(), cfg.waveform(), cfg.options
        axis = SweepAxis(opts['axis'])
        sweep = self.grid(opts['sweep_min'], opts['sweep_max'], opts['sweep_points'])
        grid = self.grid(opts['omega_min'], opts['omega_max'], opts['points'])
        result = spectrum_map(e, w, axis, sweep, grid, self.resolve_workers(cfg))
        normalized, raw = result.normalized, result.raw

        def rows():
            for i, value in enumerate(sweep):
                for j, omega in enumerate(grid):
                    yield (float(value / (2.0 * np.pi)), float(omega / (2.0 * np.pi)),
                           normalized[i, j], raw[i, j])

        writer.write_csv('spectrum_map.csv', ['sweep_hz', 'omega_hz', 'intensity', 'raw'], rows())
        return {'axis': axis.value, 'rows': len(sweep), 'columns': len(grid),
                'peak_raw': float(raw.max()) if raw.size else 0.0}
