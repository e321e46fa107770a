"""
Integration tests for the application orchestrator and the command line.
"""

import json

import pytest

from src.app import FloquetApp, main
from src.artifacts import read_csv
from src.errors import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK


@pytest.fixture
def app(registry):
    return FloquetApp(registry=registry, workers=1)


@pytest.mark.integration
class TestRun:
    """Test suite for executing run configs end to end"""

    def test_spectrum_run_writes_artifacts(self, app, spectrum_config, tmp_path):
        """Test a spectrum run exits 0 and writes data, summary and manifest"""
        assert app.run(str(spectrum_config)) == EXIT_OK

        out = tmp_path / 'out'
        for name in ('spectrum.csv', 'sidebands.csv', 'summary.json', 'config.yaml', 'manifest.json'):
            assert (out / name).exists(), name
        summary = json.loads((out / 'summary.json').read_text())
        assert summary['area'] == pytest.approx(1.0, abs=1e-9)
        manifest = json.loads((out / 'manifest.json').read_text())
        assert manifest['status'] == 'ok'
        assert manifest['task'] == 'spectrum'
        assert len(read_csv(out / 'spectrum.csv')) == 201

    def test_rerun_is_byte_identical(self, app, spectrum_config, tmp_path):
        """Test two runs of one config produce the same CSV bytes"""
        app.run(str(spectrum_config))
        first = (tmp_path / 'out' / 'spectrum.csv').read_bytes()
        app.run(str(spectrum_config))

        assert (tmp_path / 'out' / 'spectrum.csv').read_bytes() == first

    def test_output_dir_override(self, app, spectrum_config, tmp_path):
        """Test the --output-dir argument replaces the config value"""
        target = tmp_path / 'override'

        assert app.run(str(spectrum_config), str(target)) == EXIT_OK
        assert (target / 'spectrum.csv').exists()

    def test_run_is_registered(self, app, registry, spectrum_config):
        """Test the registry records a finished run"""
        app.run(str(spectrum_config))

        runs = registry.recent_runs()
        assert len(runs) == 1
        assert runs[0]['status'] == 'ok'
        assert runs[0]['exit_code'] == 0
        assert runs[0]['task'] == 'spectrum'

    def test_invalid_config_exit_code(self, app, write_config):
        """Test a config error exits with code 2 and runs nothing"""
        path = write_config("""
            task: spectrum
            emitter:
              gamma_hz: -1.0
            spectrum:
              omega_min_hz: -1.0
              omega_max_hz: 1.0
        """)

        assert app.run(str(path)) == EXIT_CONFIG

    def test_numerical_error_exit_code(self, app, registry, write_config, tmp_path):
        """Test a too-short emission window exits with code 3 and a failed manifest"""
        path = write_config(f"""
            task: pulsed
            output_dir: {tmp_path / 'pulsed'}
            emitter:
              gamma_hz: 1.0
            pulsed:
              fwhm_s: [0.001]
              tail_s: 0.001
        """)

        assert app.run(str(path)) == EXIT_NUMERICAL
        manifest = json.loads((tmp_path / 'pulsed' / 'manifest.json').read_text())
        assert manifest['status'] == 'failed'
        run = registry.recent_runs()[0]
        assert run['exit_code'] == EXIT_NUMERICAL
        assert run['error'].startswith('[pulsed]')

    def test_trajectory_run(self, app, write_config, tmp_path):
        """Test a CW trajectory run exports the population"""
        path = write_config(f"""
            task: trajectory
            output_dir: {tmp_path / 'traj'}
            emitter:
              gamma_hz: 1.0
            waveform:
              omega_hz: 2.5
              amplitude_hz: 5.0
            trajectory:
              rabi_hz: 0.1
              t_start_s: 0.0
              t_end_s: 1.0
              samples: 21
        """)

        assert app.run(str(path)) == EXIT_OK
        rows = read_csv(tmp_path / 'traj' / 'trajectory.csv')
        assert len(rows) == 21
        assert list(rows[0]) == ['t_s', 'rho_ee', 're_rho_ge', 'im_rho_ge']

    def test_transmission_with_wavepackets(self, app, write_config, tmp_path):
        """Test the wavepacket option writes the output-spectrum map"""
        path = write_config(f"""
            task: transmission
            output_dir: {tmp_path / 'trans'}
            emitter:
              gamma_hz: 1.0
            waveform:
              omega_hz: 2.5
              amplitude_hz: 5.0
            transmission:
              nu_min_hz: -5.0
              nu_max_hz: 5.0
              points: 401
              sidebands: false
              wavepacket_fwhm_hz: 0.625
              wavepacket_centers: 5
        """)

        assert app.run(str(path)) == EXIT_OK
        summary = json.loads((tmp_path / 'trans' / 'summary.json').read_text())
        assert summary['max_transmission'] <= 1.0 + 1e-9
        assert 0.0 < summary['wavepacket_max_norm'] <= 1.0 + 1e-9
        assert len(read_csv(tmp_path / 'trans' / 'wavepacket_map.csv')) == 5 * 401
        assert not (tmp_path / 'trans' / 'sidebands.csv').exists()

    def test_optimize_run(self, app, write_config, tmp_path):
        """Test an optimize run exports the waveform and its spectrum"""
        path = write_config(f"""
            task: optimize
            seed: 3
            output_dir: {tmp_path / 'opt'}
            emitter:
              gamma_hz: 1.0
            target:
              weights: {{"-1": 0.3, "1": 0.3}}
            optimize:
              omega_hz: 1.0
              max_harmonic: 2
              restarts: 2
              max_iterations: 20
              timeseries_rate_hz: 32.0
              scale_factors: [0.5, 2.0]
        """)

        assert app.run(str(path)) == EXIT_OK
        out = tmp_path / 'opt'
        waveform = json.loads((out / 'waveform.json').read_text())
        assert waveform['omega_hz'] == pytest.approx(1.0)
        assert len(read_csv(out / 'waveform_timeseries.csv')) == 32
        summary = json.loads((out / 'summary.json').read_text())
        assert summary['scale_max_deviation'] < 1e-8


@pytest.mark.integration
class TestCommandLine:
    """Test suite for argument parsing and dispatch"""

    def test_validate_ok(self, app, spectrum_config, capsys):
        """Test validate prints the task of a good config"""
        assert main(['validate', str(spectrum_config)], app=app) == EXIT_OK

        assert capsys.readouterr().out.startswith('ok: task=spectrum')

    def test_validate_show(self, app, spectrum_config, capsys):
        """Test --show prints the normalized YAML"""
        main(['validate', str(spectrum_config), '--show'], app=app)

        assert 'gamma_in_fraction: 0.5' in capsys.readouterr().out

    def test_validate_invalid(self, app, write_config, capsys):
        """Test validate reports the diagnostic and exits 2"""
        path = write_config("task: spectrum\n")

        assert main(['validate', str(path)], app=app) == EXIT_CONFIG
        assert capsys.readouterr().out.startswith('invalid:')

    def test_recipes_list(self, app, capsys):
        """Test the shipped recipes are listed with their tasks"""
        assert main(['recipes', 'list'], app=app) == EXIT_OK

        out = capsys.readouterr().out
        assert 'ramsey_contrast' in out
        assert 'sideband_spectrum' in out

    def test_unknown_recipe(self, app):
        """Test running an unknown recipe exits 2"""
        assert main(['recipes', 'run', 'no_such_recipe'], app=app) == EXIT_CONFIG

    def test_run_then_render_and_list(self, app, spectrum_config, tmp_path, capsys):
        """Test run, render and runs work together"""
        assert main(['run', str(spectrum_config)], app=app) == EXIT_OK
        dataset = tmp_path / 'out' / 'spectrum.csv'

        assert main(['render', str(dataset), '--kind', 'line'], app=app) == EXIT_OK
        assert dataset.with_suffix('.svg').exists()

        capsys.readouterr()
        assert main(['runs'], app=app) == EXIT_OK
        assert 'spectrum' in capsys.readouterr().out

    def test_runs_reports_stats_and_single_run(self, app, registry, spectrum_config, capsys):
        """Test runs prints status totals and shows one run by id"""
        assert main(['run', str(spectrum_config)], app=app) == EXIT_OK
        run_id = registry.recent_runs()[0]['run_id']

        capsys.readouterr()
        assert main(['runs'], app=app) == EXIT_OK
        assert 'total: 1 runs (1 ok)' in capsys.readouterr().out

        assert main(['runs', '--id', run_id], app=app) == EXIT_OK
        out = capsys.readouterr().out
        assert f'run_id: {run_id}' in out
        assert 'status: ok' in out

        assert main(['runs', '--id', 'no_such_run'], app=app) == EXIT_CONFIG

    def test_render_missing_dataset(self, app, tmp_path):
        """Test rendering a missing file exits 2"""
        assert main(['render', str(tmp_path / 'none.csv'), '--kind', 'line'], app=app) == EXIT_CONFIG

    def test_unknown_command(self, app):
        """Test argparse rejects an unknown subcommand"""
        with pytest.raises(SystemExit):
            main(['bogus'], app=app)
