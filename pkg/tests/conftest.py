"""
Pytest fixtures for Floquet Emitter tests.

Provides emitters in units of γ, sample waveforms, run configs written to
temporary directories and an isolated run registry.
"""

import textwrap
from unittest.mock import Mock

import pytest

from src.scattering import EmitterParams
from src.waveform import ModulationWaveform, make_sine, make_waveform


# Fixtures

@pytest.fixture
def emitter():
    """Symmetric emitter with γ = 1 rad/s at ω₀ = 0"""
    return EmitterParams.symmetric(1.0)


@pytest.fixture
def flat_waveform():
    """Unmodulated waveform; Ω = γ only sets the reference period"""
    return ModulationWaveform(1.0)


@pytest.fixture
def fast_sine():
    """A = 5γ, Ω = 2.5γ: the fast-modulation regime"""
    return make_sine(5.0, 2.5)


@pytest.fixture
def multi_harmonic():
    """Asymmetric three-harmonic waveform (Ω = 2γ)"""
    return make_waveform(2.0, [1.2 - 0.4j, 0.5 + 0.9j, -0.3j])


@pytest.fixture
def write_config(tmp_path):
    """Write dedented YAML into the temporary directory and return its path"""
    def _write(text: str, name: str = 'run.yaml'):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text), encoding='utf-8')
        return path
    return _write


@pytest.fixture
def spectrum_config(write_config, tmp_path):
    """Minimal valid spectrum run config with its output under tmp_path"""
    return write_config(f"""
        task: spectrum
        output_dir: {tmp_path / 'out'}
        emitter:
          gamma_hz: 1.0
        waveform:
          omega_hz: 2.5
          amplitude_hz: 5.0
        spectrum:
          omega_min_hz: -10.0
          omega_max_hz: 10.0
          points: 201
    """)


@pytest.fixture
def registry(tmp_path):
    """Run registry backed by a temporary sqlite file"""
    from src.run_registry import RunRegistry
    return RunRegistry(str(tmp_path / 'runs.db'))


@pytest.fixture
def mock_app():
    """Application stand-in carrying only what the router reads"""
    app = Mock()
    app.workers = 1
    return app


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """Keep developer environment variables out of the tests"""
    for name in ('FLOQUET_OUTPUT_DIR', 'FLOQUET_WORKERS', 'FLOQUET_REGISTRY'):
        monkeypatch.delenv(name, raising=False)
