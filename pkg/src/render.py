"""
SVG charts from exported CSV datasets.

Line charts plot every numeric column against the first one; heatmaps take a
long-format (x, y, value) table that covers a full rectangular grid. Output
bytes are deterministic: fixed hash salt, no creation date in the metadata.
"""

import io
from pathlib import Path
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .artifacts import atomic_write, read_csv  # noqa: E402
from .errors import RenderError  # noqa: E402
from .logging_config import get_logger  # noqa: E402

logger = get_logger(__name__)

KINDS = ('line', 'heatmap')

STYLE = {
    'svg.hashsalt': 'floquet-emitter',
    'svg.fonttype': 'none',
    'font.family': 'sans-serif',
    'font.size': 9,
    'axes.labelsize': 10,
    'axes.prop_cycle': matplotlib.cycler(color=['#08589e', '#d95f02', '#4eb3d3', '#7570b3', '#1b9e77']),
    'lines.linewidth': 1.2,
    'figure.figsize': (5.0, 3.4),
    'figure.dpi': 100,
    'image.cmap': 'viridis',
}


def _numeric_columns(rows: List[dict], columns: Sequence[str], source: str) -> np.ndarray:
    try:
        return np.array([[float(row[c]) for c in columns] for row in rows])
    except (TypeError, ValueError, KeyError) as e:
        raise RenderError(f"non-numeric value in {source}: {e}")


def _load(path: Path) -> List[dict]:
    try:
        rows = read_csv(path)
    except OSError as e:
        raise RenderError(f"cannot read dataset: {e.strerror or e}", path=str(path))
    if not rows:
        raise RenderError("dataset has no rows", path=str(path))
    if any(None in row or None in row.values() for row in rows):
        raise RenderError("dataset rows do not match the header", path=str(path))
    return rows


def _line(ax, rows: List[dict], columns: List[str], x: Optional[str], y: Optional[List[str]], source: str):
    x = x or columns[0]
    y = y or [c for c in columns if c != x]
    if not y:
        raise RenderError("line chart needs at least two columns", path=source)
    values = _numeric_columns(rows, [x] + y, source)
    order = np.argsort(values[:, 0], kind='stable')
    for i, name in enumerate(y, start=1):
        ax.plot(values[order, 0], values[order, i], label=name)
    ax.set_xlabel(x)
    if len(y) == 1:
        ax.set_ylabel(y[0])
    else:
        ax.legend(frameon=False)


def _heatmap(fig, ax, rows: List[dict], columns: List[str], x: Optional[str], y: Optional[str],
             z: Optional[str], source: str):
    if len(columns) < 3 and not (x and y and z):
        raise RenderError("heatmap needs x, y and value columns", path=source)
    x, y, z = x or columns[0], y or columns[1], z or columns[2]
    values = _numeric_columns(rows, [x, y, z], source)
    xs, x_index = np.unique(values[:, 0], return_inverse=True)
    ys, y_index = np.unique(values[:, 1], return_inverse=True)
    if len(xs) < 2 or len(ys) < 2 or len(values) != len(xs) * len(ys):
        raise RenderError("heatmap data does not cover a rectangular grid", path=source)
    grid = np.full((len(ys), len(xs)), np.nan)
    grid[y_index, x_index] = values[:, 2]
    if np.isnan(grid).any():
        raise RenderError("heatmap grid has duplicate or missing cells", path=source)
    image = ax.imshow(grid, origin='lower', aspect='auto', interpolation='nearest',
                      extent=(xs[0], xs[-1], ys[0], ys[-1]))
    fig.colorbar(image, ax=ax, label=z)
    ax.set_xlabel(x)
    ax.set_ylabel(y)


def render_svg(dataset, kind: str, output=None, x: Optional[str] = None,
               y: Optional[Sequence[str]] = None, z: Optional[str] = None,
               title: Optional[str] = None) -> Path:
    """
    Render a CSV dataset as a standalone SVG.

    Args:
        dataset: CSV file with a header row
        kind: 'line' or 'heatmap'
        output: SVG path, defaults to the dataset path with .svg
        x, y, z: column names; default to the first columns in order

    Raises:
        RenderError: unknown kind or malformed dataset
    """
    if kind not in KINDS:
        raise RenderError(f"unknown chart kind '{kind}'", kinds=', '.join(KINDS))
    dataset = Path(dataset)
    output = Path(output) if output else dataset.with_suffix('.svg')
    rows = _load(dataset)
    columns = list(rows[0].keys())

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        try:
            if kind == 'line':
                _line(ax, rows, columns, x, list(y) if y else None, str(dataset))
            else:
                _heatmap(fig, ax, rows, columns, x, y[0] if y else None, z, str(dataset))
            if title:
                ax.set_title(title)
            fig.tight_layout()
            buffer = io.BytesIO()
            fig.savefig(buffer, format='svg', metadata={'Date': None})
        finally:
            plt.close(fig)

    atomic_write(output, buffer.getvalue())
    logger.info("Chart rendered", extra={'extra_fields': {'kind': kind, 'output': str(output)}})
    return output
