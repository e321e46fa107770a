"""
Unit tests for YAML run configurations and shipped recipes.
"""

import math

import pytest

from src.config import dump_config, load_config, parse_config
from src.errors import ConfigError
from src.recipes import find_recipe, list_recipes

TWO_PI = 2.0 * math.pi

SPECTRUM = """task: spectrum
emitter:
  gamma_hz: 1.0
waveform:
  omega_hz: 2.5
  amplitude_hz: 5.0
spectrum:
  omega_min_hz: -10.0
  omega_max_hz: 10.0
  points: 201
"""


@pytest.mark.unit
class TestParseConfig:
    """Test suite for parsing and unit conversion"""

    def test_hz_fields_become_rad_per_s(self):
        """Test `_hz` options are multiplied by 2π and lose their suffix"""
        cfg = parse_config(SPECTRUM)

        assert cfg.task == 'spectrum'
        assert cfg.options['omega_min'] == pytest.approx(-10.0 * TWO_PI)
        assert cfg.options['points'] == 201
        assert cfg.emitter().gamma == pytest.approx(TWO_PI)

    def test_sine_waveform(self):
        """Test amplitude_hz builds a sine drive in rad/s"""
        w = parse_config(SPECTRUM).waveform()

        assert w.fundamental == pytest.approx(2.5 * TWO_PI)
        assert 2.0 * abs(w.harmonics[0][1]) == pytest.approx(5.0 * TWO_PI)

    def test_defaults_filled_in(self):
        """Test omitted optional fields take their defaults"""
        cfg = parse_config(SPECTRUM)

        assert cfg.seed == 0
        assert cfg.workers is None
        assert cfg.data['emitter']['gamma_in_fraction'] == 0.5
        assert cfg.options['transitions'] is None

    def test_missing_waveform_is_unmodulated(self):
        """Test an absent waveform section gives Δ = 0 at Ω = γ"""
        text = SPECTRUM.replace("waveform:\n  omega_hz: 2.5\n  amplitude_hz: 5.0\n", "")
        cfg = parse_config(text)
        w = cfg.waveform()

        assert w.is_zero()
        assert w.fundamental == pytest.approx(cfg.emitter().gamma)

    def test_exponent_without_dot(self):
        """Test 1e6, which YAML reads as a string, is accepted as a number"""
        cfg = parse_config(SPECTRUM.replace("gamma_hz: 1.0", "gamma_hz: 1e6"))

        assert cfg.data['emitter']['gamma_hz'] == 1e6

    def test_seconds_and_radians_keep_their_values(self, write_config):
        """Test `_s` and `_rad` fields are only renamed"""
        path = write_config("""
            task: trajectory
            emitter:
              gamma_hz: 1.0
            trajectory:
              pulse_fwhm_s: 0.1
              pulse_area_rad: 3.0
              t_start_s: -1.0
              t_end_s: 2.0
        """)
        opts = load_config(path).options

        assert opts['pulse_fwhm'] == 0.1
        assert opts['pulse_area'] == 3.0
        assert opts['t_end'] == 2.0

    def test_dump_roundtrip(self):
        """Test dumping and re-parsing keeps the normalized form"""
        cfg = parse_config(SPECTRUM)

        assert parse_config(dump_config(cfg)).normalized() == cfg.normalized()

    def test_output_dir_env_override(self, monkeypatch, tmp_path):
        """Test FLOQUET_OUTPUT_DIR wins over the config value"""
        monkeypatch.setenv('FLOQUET_OUTPUT_DIR', str(tmp_path / 'elsewhere'))

        assert parse_config(SPECTRUM).output_dir == tmp_path / 'elsewhere'


@pytest.mark.unit
class TestValidation:
    """Test suite for diagnostics on invalid configs"""

    def test_missing_field_names_path_and_line(self):
        """Test a missing required field reports its section line"""
        text = SPECTRUM.replace("  omega_max_hz: 10.0\n", "")

        with pytest.raises(ConfigError) as info:
            parse_config(text, 'run.yaml')

        assert info.value.field == 'spectrum.omega_max_hz'
        assert info.value.line == 7
        assert str(info.value).startswith('run.yaml: line 7: field')

    def test_unknown_field_reports_its_line(self):
        """Test an unknown key is reported at its own line"""
        text = SPECTRUM.replace("  gamma_hz: 1.0\n", "  gamma_hz: 1.0\n  colour: red\n")

        with pytest.raises(ConfigError) as info:
            parse_config(text)

        assert info.value.field == 'emitter.colour'
        assert info.value.line == 4

    def test_unknown_task(self):
        """Test an unsupported task name is rejected"""
        with pytest.raises(ConfigError) as info:
            parse_config("task: tomography\nemitter:\n  gamma_hz: 1.0\n")

        assert info.value.field == 'task'

    def test_foreign_section_rejected(self):
        """Test a section for another task is an error"""
        with pytest.raises(ConfigError):
            parse_config(SPECTRUM + "ramsey:\n  amplitude_hz: 1.0\n")

    def test_wrong_types(self):
        """Test non-numeric and non-integer values are rejected"""
        with pytest.raises(ConfigError):
            parse_config(SPECTRUM.replace("points: 201", "points: 2.5"))
        with pytest.raises(ConfigError):
            parse_config(SPECTRUM.replace("gamma_hz: 1.0", "gamma_hz: fast"))

    def test_non_positive_rate(self):
        """Test γ ≤ 0 is rejected"""
        with pytest.raises(ConfigError) as info:
            parse_config(SPECTRUM.replace("gamma_hz: 1.0", "gamma_hz: 0.0"))

        assert info.value.field == 'emitter.gamma_hz'

    def test_reversed_range(self):
        """Test omega_max_hz must exceed omega_min_hz"""
        with pytest.raises(ConfigError):
            parse_config(SPECTRUM.replace("omega_max_hz: 10.0", "omega_max_hz: -20.0"))

    def test_two_waveform_sources(self):
        """Test amplitude_hz and harmonics cannot both be given"""
        text = SPECTRUM.replace("  amplitude_hz: 5.0\n",
                                "  amplitude_hz: 5.0\n  harmonics:\n    - k: 1\n      re_hz: 1.0\n")

        with pytest.raises(ConfigError):
            parse_config(text)

    def test_target_needs_exactly_one_source(self):
        """Test an optimize target with neither file nor weights is rejected"""
        text = """task: optimize
emitter:
  gamma_hz: 1.0
target:
  bandwidth: 4
optimize:
  omega_hz: 1.0
"""
        with pytest.raises(ConfigError) as info:
            parse_config(text)

        assert info.value.field == 'target'

    def test_optimize_rejects_waveform(self):
        """Test the optimize task does not accept a waveform"""
        text = """task: optimize
emitter:
  gamma_hz: 1.0
waveform:
  omega_hz: 1.0
target:
  weights: {"-1": 0.5, "1": 0.5}
optimize:
  omega_hz: 1.0
"""
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_target_weights_inline(self):
        """Test inline weights build a spectral target"""
        text = """task: optimize
emitter:
  gamma_hz: 1.0
target:
  weights: {"-1": 0.5, "1": 0.5}
  bandwidth: 4
optimize:
  omega_hz: 1.0
"""
        target = parse_config(text).target()

        assert target.weights == {-1: 0.5, 1: 0.5}
        assert target.bandwidth == 4

    def test_trajectory_needs_one_drive(self, write_config):
        """Test a trajectory with both a CW and a pulsed drive is rejected"""
        path = write_config("""
            task: trajectory
            emitter:
              gamma_hz: 1.0
            trajectory:
              rabi_hz: 1.0
              pulse_fwhm_s: 0.1
              pulse_area_rad: 3.0
              t_start_s: 0.0
              t_end_s: 1.0
        """)

        with pytest.raises(ConfigError):
            load_config(path)

    def test_invalid_yaml_reports_line(self):
        """Test a YAML syntax error carries its line"""
        with pytest.raises(ConfigError) as info:
            parse_config("task: spectrum\nemitter: [1, 2\n")

        assert info.value.line is not None

    def test_missing_file(self, tmp_path):
        """Test an unreadable config path raises ConfigError"""
        with pytest.raises(ConfigError):
            load_config(tmp_path / 'absent.yaml')


@pytest.mark.unit
class TestRecipes:
    """Test suite for the shipped recipes"""

    def test_recipes_are_listed(self):
        """Test every recipe carries a task and a description"""
        recipes = list_recipes()

        assert len(recipes) >= 10
        for recipe in recipes:
            assert recipe.description
            assert recipe.task != '?'

    def test_every_recipe_validates(self):
        """Test each shipped recipe parses and builds its physical inputs"""
        for recipe in list_recipes():
            cfg = load_config(recipe.path)

            assert cfg.task == recipe.task
            cfg.emitter()
            if cfg.task == 'optimize':
                cfg.target()
            else:
                cfg.waveform()

    def test_find_recipe(self):
        """Test recipes are found by name and unknown names raise"""
        assert find_recipe('ramsey_contrast').name == 'ramsey_contrast.yaml'
        with pytest.raises(ConfigError):
            find_recipe('no_such_recipe')
