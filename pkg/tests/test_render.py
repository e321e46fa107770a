"""
Unit tests for SVG rendering of exported datasets.
"""

import pytest

from src.artifacts import csv_bytes
from src.errors import RenderError
from src.render import render_svg


@pytest.fixture
def line_dataset(tmp_path):
    path = tmp_path / 'spectrum.csv'
    path.write_bytes(csv_bytes(['omega_hz', 'intensity'], [(x / 10.0, 1.0 / (1.0 + x * x)) for x in range(-20, 21)]))
    return path


@pytest.fixture
def heatmap_dataset(tmp_path):
    path = tmp_path / 'map.csv'
    rows = [(float(s), float(w), float(s * w)) for s in range(4) for w in range(5)]
    path.write_bytes(csv_bytes(['sweep_hz', 'omega_hz', 'intensity'], rows))
    return path


@pytest.mark.unit
class TestRenderSvg:
    """Test suite for chart rendering"""

    def test_line_chart(self, line_dataset):
        """Test a line chart lands next to the dataset"""
        output = render_svg(line_dataset, 'line')

        assert output == line_dataset.with_suffix('.svg')
        assert output.read_text().lstrip().startswith('<?xml')

    def test_output_is_deterministic(self, line_dataset, tmp_path):
        """Test rendering twice gives identical bytes"""
        first = render_svg(line_dataset, 'line', tmp_path / 'a.svg', title='Spectrum')
        second = render_svg(line_dataset, 'line', tmp_path / 'b.svg', title='Spectrum')

        assert first.read_bytes() == second.read_bytes()

    def test_heatmap(self, heatmap_dataset, tmp_path):
        """Test a rectangular long-format table renders as a heatmap"""
        output = render_svg(heatmap_dataset, 'heatmap', tmp_path / 'map.svg')

        assert output.exists()

    def test_unknown_kind(self, line_dataset):
        """Test an unknown chart kind raises RenderError"""
        with pytest.raises(RenderError):
            render_svg(line_dataset, 'pie')

    def test_missing_dataset(self, tmp_path):
        """Test a missing file raises RenderError"""
        with pytest.raises(RenderError):
            render_svg(tmp_path / 'absent.csv', 'line')

    def test_empty_dataset(self, tmp_path):
        """Test a header-only file raises RenderError"""
        path = tmp_path / 'empty.csv'
        path.write_text('x,y\n')

        with pytest.raises(RenderError):
            render_svg(path, 'line')

    def test_ragged_heatmap(self, tmp_path):
        """Test a grid with a missing cell raises RenderError"""
        path = tmp_path / 'ragged.csv'
        rows = [(0.0, 0.0, 1.0), (0.0, 1.0, 1.0), (1.0, 0.0, 1.0)]
        path.write_bytes(csv_bytes(['x', 'y', 'z'], rows))

        with pytest.raises(RenderError):
            render_svg(path, 'heatmap')

    def test_non_numeric_values(self, tmp_path):
        """Test text in a numeric column raises RenderError"""
        path = tmp_path / 'text.csv'
        path.write_text('x,y\n1,a\n2,b\n')

        with pytest.raises(RenderError):
            render_svg(path, 'line')
