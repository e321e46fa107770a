"""
YAML run configurations.

A run config names exactly one task and carries the emitter, the waveform
(or an optimiser target) and a section of options for that task. Field names
carry their unit: `_hz` for ordinary frequencies, `_s` for times, `_rad` for
angles. Everything is converted to rad/s here and nowhere else.

Validation errors name the file, the line and the dotted field path.
"""

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .errors import ConfigError, FloquetError
from .logging_config import get_logger
from .optimizer import SpectralTarget
from .scattering import EmitterParams
from .waveform import ModulationWaveform, make_sine

logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi
OUTPUT_DIR_ENV = 'FLOQUET_OUTPUT_DIR'
TASKS = ('spectrum', 'transmission', 'map', 'g2', 'optimize', 'pulsed', 'ramsey', 'trajectory')
REQUIRED = object()


@dataclass(frozen=True)
class Field:
    kind: str
    default: Any = REQUIRED
    choices: Tuple[str, ...] = ()
    positive: bool = False
    non_negative: bool = False


EMITTER_FIELDS = {
    'omega0_hz': Field('float', 0.0),
    'gamma_hz': Field('float', positive=True),
    'gamma_in_fraction': Field('float', 0.5, positive=True),
}

WAVEFORM_FIELDS = {
    'omega_hz': Field('float', None, positive=True),
    'amplitude_hz': Field('float', None, non_negative=True),
    'phase_rad': Field('float', 0.0),
    'harmonics': Field('harmonics', None),
    'file': Field('path', None),
}

TARGET_FIELDS = {
    'file': Field('path', None),
    'weights': Field('mapping', None),
    'phases': Field('mapping', None),
    'bandwidth': Field('int', None, positive=True),
}

TASK_FIELDS: Dict[str, Dict[str, Field]] = {
    'spectrum': {
        'omega_min_hz': Field('float'),
        'omega_max_hz': Field('float'),
        'points': Field('int', 2001, positive=True),
        'transitions': Field('transitions', None),
    },
    'transmission': {
        'nu_min_hz': Field('float'),
        'nu_max_hz': Field('float'),
        'points': Field('int', 2001, positive=True),
        'p_window': Field('int', None, positive=True),
        'sidebands': Field('bool', True),
        'quasistatic': Field('bool', False),
        'wavepacket_fwhm_hz': Field('float', None, positive=True),
        'wavepacket_centers': Field('int', 41, positive=True),
    },
    'map': {
        'axis': Field('str', 'fundamental', choices=('fundamental', 'amplitude', 'scaled')),
        'sweep_min_hz': Field('float', non_negative=True),
        'sweep_max_hz': Field('float', positive=True),
        'sweep_points': Field('int', 101, positive=True),
        'omega_min_hz': Field('float'),
        'omega_max_hz': Field('float'),
        'points': Field('int', 801, positive=True),
    },
    'g2': {
        'epsilon_hz': Field('float', None, positive=True),
        'laser_detuning_hz': Field('float', 0.0),
        'phase_rad': Field('float', 0.0),
        'tau_max_s': Field('float', positive=True),
        'tau_points': Field('int', 401, positive=True),
        't_samples': Field('int', 64, positive=True),
        'verify_weak_drive': Field('bool', True),
        'map': Field('bool', False),
        'fold_settle_s': Field('float', None, non_negative=True),
        'cross_validate': Field('bool', False),
    },
    'optimize': {
        'omega_hz': Field('float', positive=True),
        'max_harmonic': Field('int', 4, positive=True),
        'restarts': Field('int', 20, positive=True),
        'gradient_step': Field('float', 1e-6, positive=True),
        'tolerance': Field('float', 1e-6, positive=True),
        'leakage_weight': Field('float', 1.0, non_negative=True),
        'match_phases': Field('bool', False),
        'max_iterations': Field('int', 400, positive=True),
        'bandwidth_cap_hz': Field('float', None, positive=True),
        'scale_factors': Field('floats', None),
        'timeseries_rate_hz': Field('float', None, positive=True),
    },
    'pulsed': {
        'fwhm_s': Field('floats'),
        'detuning_hz': Field('float', 0.0),
        'phase_points': Field('int', 64, positive=True),
        'area_points': Field('int', 33, positive=True),
        'area_max_rad': Field('float', 4.0 * math.pi, positive=True),
        'tail_s': Field('float', None, positive=True),
        'photon_tolerance': Field('float', 1e-3, positive=True),
        'refine': Field('bool', True),
        'optimize': Field('bool', True),
        'reference': Field('bool', True),
        'phase_scan_area_rad': Field('float', None, positive=True),
        'phase_scan_points': Field('int', 64, positive=True),
    },
    'ramsey': {
        'amplitude_hz': Field('float', non_negative=True),
        't_delay_s': Field('float', positive=True),
        'omega_min_hz': Field('float', positive=True),
        'omega_max_hz': Field('float', positive=True),
        'omega_points': Field('int', 201, positive=True),
        'n_phases': Field('int', 4096, positive=True),
        'decay': Field('bool', False),
        'fringe_omega_hz': Field('float', None, positive=True),
        'fringe_omega_ref_hz': Field('float', 0.0),
        'fringe_window_s': Field('float', None, positive=True),
        'fringe_points': Field('int', 201, positive=True),
    },
    'trajectory': {
        'rabi_hz': Field('float', None, non_negative=True),
        'pulse_fwhm_s': Field('float', None, positive=True),
        'pulse_area_rad': Field('float', None, non_negative=True),
        'pulse_center_s': Field('float', 0.0),
        'laser_detuning_hz': Field('float', 0.0),
        'phase_rad': Field('float', 0.0),
        't_start_s': Field('float'),
        't_end_s': Field('float'),
        'samples': Field('int', 401, positive=True),
        'steady_state': Field('bool', False),
    },
}

TOP_FIELDS = {
    'task': Field('str', choices=TASKS),
    'seed': Field('int', 0, non_negative=True),
    'output_dir': Field('str', 'out'),
    'workers': Field('int', None, positive=True),
}

SECTIONS = {'emitter': EMITTER_FIELDS, 'waveform': WAVEFORM_FIELDS, 'target': TARGET_FIELDS}


def _line_index(node, prefix: str = '', index: Optional[Dict[str, int]] = None) -> Dict[str, int]:
    """Dotted field path -> 1-based line number, from a composed YAML node"""
    if index is None:
        index = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            index[path] = key_node.start_mark.line + 1
            _line_index(value_node, path, index)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            path = f"{prefix}[{i}]"
            index[path] = item.start_mark.line + 1
            _line_index(item, path, index)
    return index


class _Validator:
    def __init__(self, path: Optional[str], lines: Dict[str, int]):
        self.path = path
        self.lines = lines

    def fail(self, message: str, field_path: str):
        line = self.lines.get(field_path)
        if line is None and '.' in field_path:
            line = self.lines.get(field_path.rsplit('.', 1)[0])
        raise ConfigError(message, self.path, line, field_path)

    def number(self, value, where: str, spec: Field, integer: bool = False):
        if isinstance(value, str) and not integer:
            # YAML 1.1 reads exponents without a dot, like 1e-6, as strings
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(f"expected a {'integer' if integer else 'number'}, got {value!r}", where)
        if integer and not isinstance(value, int):
            self.fail(f"expected an integer, got {value!r}", where)
        value = int(value) if integer else float(value)
        if not math.isfinite(value):
            self.fail("value must be finite", where)
        if spec.positive and not value > 0:
            self.fail("value must be positive", where)
        if spec.non_negative and value < 0:
            self.fail("value must be non-negative", where)
        return value

    def value(self, value, where: str, spec: Field):
        if value is None:
            return None
        kind = spec.kind
        if kind == 'float':
            return self.number(value, where, spec)
        if kind == 'int':
            return self.number(value, where, spec, integer=True)
        if kind == 'bool':
            if not isinstance(value, bool):
                self.fail(f"expected true or false, got {value!r}", where)
            return value
        if kind in ('str', 'path'):
            if not isinstance(value, str):
                self.fail(f"expected a string, got {value!r}", where)
            if spec.choices and value not in spec.choices:
                self.fail(f"must be one of {', '.join(spec.choices)}", where)
            return value
        if kind == 'floats':
            items = value if isinstance(value, list) else [value]
            if not items:
                self.fail("list must not be empty", where)
            return [self.number(v, f"{where}[{i}]", spec) for i, v in enumerate(items)]
        if kind == 'mapping':
            if not isinstance(value, dict):
                self.fail("expected a mapping", where)
            try:
                keyed = sorted((int(k), v) for k, v in value.items())
            except (TypeError, ValueError):
                self.fail("sideband indices must be integers", where)
            return {str(k): self.number(v, f"{where}.{k}", Field('float')) for k, v in keyed}
        if kind == 'harmonics':
            return [self.record(item, f"{where}[{i}]",
                                {'k': Field('int', positive=True), 're_hz': Field('float', 0.0),
                                 'im_hz': Field('float', 0.0)})
                    for i, item in enumerate(self.listing(value, where))]
        if kind == 'transitions':
            return [self.record(item, f"{where}[{i}]",
                                {'offset_hz': Field('float'),
                                 'weight': Field('float', 1.0, non_negative=True)})
                    for i, item in enumerate(self.listing(value, where))]
        raise AssertionError(kind)

    def listing(self, value, where: str) -> List:
        if not isinstance(value, list) or not value:
            self.fail("expected a non-empty list", where)
        return value

    def record(self, data, where: str, fields: Dict[str, Field]) -> Dict[str, Any]:
        if data is None:
            data = {}
        if not isinstance(data, dict):
            self.fail("expected a mapping", where)
        for key in data:
            if key not in fields:
                self.fail(f"unknown field '{key}'", f"{where}.{key}" if where else str(key))
        out = {}
        for name, spec in fields.items():
            dotted = f"{where}.{name}" if where else name
            if name not in data or data[name] is None:
                if spec.default is REQUIRED:
                    self.fail("missing required field", dotted)
                out[name] = spec.default
            else:
                out[name] = self.value(data[name], dotted, spec)
        return out


def _normalize(data: Any, path: Optional[str], lines: Dict[str, int]) -> Dict[str, Any]:
    check = _Validator(path, lines)
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping", path, 1)
    task = data.get('task')
    allowed = set(TOP_FIELDS) | set(SECTIONS) | set(TASK_FIELDS)
    for key in data:
        if key not in allowed:
            check.fail(f"unknown field '{key}'", str(key))
        if key in TASK_FIELDS and key != task:
            check.fail(f"section '{key}' does not belong to task '{task}'", str(key))

    normalized = check.record({k: data.get(k) for k in TOP_FIELDS}, '', TOP_FIELDS)
    normalized['emitter'] = check.record(data.get('emitter'), 'emitter', EMITTER_FIELDS)
    if not normalized['emitter']['gamma_in_fraction'] < 1.0:
        check.fail("value must be below 1", 'emitter.gamma_in_fraction')
    if task == 'optimize':
        if 'waveform' in data:
            check.fail("optimize takes a target instead of a waveform", 'waveform')
        normalized['target'] = check.record(data.get('target'), 'target', TARGET_FIELDS)
        _check_target(check, normalized['target'], path)
    else:
        if 'target' in data:
            check.fail("only the optimize task takes a target", 'target')
        if data.get('waveform') is not None:
            normalized['waveform'] = check.record(data['waveform'], 'waveform', WAVEFORM_FIELDS)
            _check_waveform(check, normalized['waveform'], path)
    normalized[task] = check.record(data.get(task), task, TASK_FIELDS[task])
    _check_task(check, task, normalized[task])
    return normalized


def _resolve(reference: str, config_path: Optional[str]) -> Path:
    candidate = Path(reference)
    if not candidate.is_absolute() and config_path:
        beside = Path(config_path).parent / candidate
        if beside.exists():
            return beside
    return candidate


def _check_waveform(check: _Validator, section: Dict[str, Any], path: Optional[str]) -> None:
    given = [k for k in ('amplitude_hz', 'harmonics', 'file') if section[k] is not None]
    if len(given) > 1:
        check.fail(f"give only one of amplitude_hz, harmonics, file (got {', '.join(given)})",
                   f"waveform.{given[1]}")
    if section['file'] is not None:
        if not _resolve(section['file'], path).exists():
            check.fail(f"file not found: {section['file']}", 'waveform.file')
    elif section['omega_hz'] is None:
        check.fail("missing required field", 'waveform.omega_hz')


def _check_target(check: _Validator, section: Dict[str, Any], path: Optional[str]) -> None:
    if (section['file'] is None) == (section['weights'] is None):
        check.fail("give exactly one of file or weights", 'target')
    if section['file'] is not None and not _resolve(section['file'], path).exists():
        check.fail(f"file not found: {section['file']}", 'target.file')


def _check_task(check: _Validator, task: str, options: Dict[str, Any]) -> None:
    def ordered(low: str, high: str):
        if not options[high] > options[low]:
            check.fail(f"{high} must exceed {low}", f"{task}.{high}")

    if task == 'spectrum':
        ordered('omega_min_hz', 'omega_max_hz')
    elif task == 'transmission':
        ordered('nu_min_hz', 'nu_max_hz')
    elif task == 'map':
        ordered('sweep_min_hz', 'sweep_max_hz')
        if options['axis'] != 'amplitude' and not options['sweep_min_hz'] > 0:
            check.fail("swept fundamentals must be positive", f"{task}.sweep_min_hz")
        ordered('omega_min_hz', 'omega_max_hz')
    elif task == 'ramsey':
        ordered('omega_min_hz', 'omega_max_hz')
    elif task == 'trajectory':
        ordered('t_start_s', 't_end_s')
        cw = options['rabi_hz'] is not None
        pulse = options['pulse_fwhm_s'] is not None or options['pulse_area_rad'] is not None
        if cw == pulse:
            check.fail("give either rabi_hz or pulse_fwhm_s with pulse_area_rad", task)
        if pulse and (options['pulse_fwhm_s'] is None or options['pulse_area_rad'] is None):
            check.fail("a pulse needs both pulse_fwhm_s and pulse_area_rad", task)
        if options['steady_state'] and not cw:
            check.fail("steady_state needs a continuous drive", f"{task}.steady_state")
    elif task == 'pulsed':
        if any(v <= 0 for v in options['fwhm_s']):
            check.fail("pulse widths must be positive", f"{task}.fwhm_s")


def _converted(section: Dict[str, Any]) -> Dict[str, Any]:
    """Strip unit suffixes; `_hz` values become rad/s"""
    out = {}
    for key, value in section.items():
        if key.endswith('_hz'):
            name = key[:-3]
            if isinstance(value, list):
                value = [TWO_PI * v for v in value]
            elif value is not None:
                value = TWO_PI * value
        elif key.endswith('_s') or key.endswith('_rad'):
            name = key.rsplit('_', 1)[0]
        else:
            name = key
        out[name] = value
    return out


@dataclass
class RunConfig:
    """Validated run configuration"""

    data: Dict[str, Any]
    path: Optional[str] = None
    lines: Dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def task(self) -> str:
        return self.data['task']

    @property
    def seed(self) -> int:
        return self.data['seed']

    @property
    def workers(self) -> Optional[int]:
        return self.data['workers']

    @property
    def output_dir(self) -> Path:
        override = os.getenv(OUTPUT_DIR_ENV)
        return Path(override) if override else Path(self.data['output_dir'])

    def normalized(self) -> Dict[str, Any]:
        """Canonical form: defaults filled in, only sections in use"""
        return json.loads(json.dumps(self.data, sort_keys=True))

    @property
    def options(self) -> Dict[str, Any]:
        """Task options in rad/s, seconds and radians"""
        return _converted(self.data[self.task])

    def emitter(self) -> EmitterParams:
        section = self.data['emitter']
        gamma = TWO_PI * section['gamma_hz']
        gamma_in = gamma * section['gamma_in_fraction']
        try:
            return EmitterParams(TWO_PI * section['omega0_hz'], gamma, gamma_in, gamma - gamma_in)
        except FloquetError as e:
            raise ConfigError(e.message, self.path, self.lines.get('emitter'), 'emitter')

    def waveform(self) -> ModulationWaveform:
        """The configured modulation; unmodulated at Ω = γ when the section is absent"""
        section = self.data.get('waveform')
        try:
            if section is None:
                return ModulationWaveform(self.emitter().gamma)
            if section['file'] is not None:
                with open(_resolve(section['file'], self.path), 'r', encoding='utf-8') as handle:
                    return ModulationWaveform.from_dict(json.load(handle))
            omega = TWO_PI * section['omega_hz']
            if section['amplitude_hz'] is not None:
                return make_sine(TWO_PI * section['amplitude_hz'], omega, section['phase_rad'])
            harmonics = tuple((h['k'], TWO_PI * complex(h['re_hz'], h['im_hz']))
                              for h in section['harmonics'] or ())
            return ModulationWaveform(omega, harmonics)
        except (FloquetError, OSError, json.JSONDecodeError) as e:
            raise ConfigError(str(e), self.path, self.lines.get('waveform'), 'waveform')

    def target(self) -> SpectralTarget:
        section = self.data['target']
        try:
            if section['file'] is not None:
                with open(_resolve(section['file'], self.path), 'r', encoding='utf-8') as handle:
                    return SpectralTarget.from_dict(json.load(handle))
            return SpectralTarget.from_dict({'weights': section['weights'],
                                             'phases': section['phases'],
                                             'bandwidth': section['bandwidth']})
        except (FloquetError, OSError, json.JSONDecodeError) as e:
            raise ConfigError(str(e), self.path, self.lines.get('target'), 'target')


def parse_config(text: str, path: Optional[str] = None) -> RunConfig:
    """
    Parse and validate YAML text.

    Raises:
        ConfigError: malformed YAML or an invalid field, with line diagnostics
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML: {getattr(e, 'problem', None) or e}", path, line)
    lines = _line_index(node) if node is not None else {}
    normalized = _normalize(data, path, lines)
    logger.debug("Config validated", extra={'extra_fields': {'path': path, 'task': normalized['task']}})
    return RunConfig(normalized, path, lines)


def load_config(path) -> RunConfig:
    path = str(path)
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror or e}", path)
    return parse_config(text, path)


def dump_config(cfg: RunConfig) -> str:
    """YAML text of the normalized config; parsing it gives the same normalized form"""
    return yaml.safe_dump(cfg.normalized(), sort_keys=True, default_flow_style=False)
