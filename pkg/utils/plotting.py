"""
Static SVG figures. Agg backend, a fixed hash salt and no date metadata, so the
same data always produces the same file.
"""

from typing import Dict, Optional, Sequence, Tuple

import matplotlib as mpl
mpl.use('Agg')

import matplotlib.pyplot as plt
import numpy as np

SVG_RCPARAMS = {
    'svg.hashsalt': 'gnlab',
    'svg.fonttype': 'none',
    'font.size': 9,
    'axes.labelsize': 9,
    'legend.fontsize': 8,
    'xtick.labelsize': 8,
    'ytick.labelsize': 8,
}
mpl.rcParams.update(SVG_RCPARAMS)

METHOD_COLORS = {'none': '#444444', 'sg': '#1f77b4', 'ng': '#d62728', 'fg': '#2ca02c'}


def new(nrows: int = 1, ncols: int = 1, size: Tuple[float, float] = (4.0, 3.2)):
    return plt.subplots(nrows=nrows, ncols=ncols, figsize=(size[0] * ncols, size[1] * nrows), squeeze=False)


def save(fig, path: str):
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)


def arrow_figure(point: np.ndarray, arrows: Dict[str, Tuple[np.ndarray, np.ndarray]], path: str,
                 background: Optional[Tuple[np.ndarray, np.ndarray]] = None):
    """
    One panel per method: the per-draw explanation vectors (thin) and their
    mean (thick) anchored at `point`. `background` is (inputs, labels) drawn underneath.
    """
    fig, axes = new(1, len(arrows))
    for ax, (name, (draws, mean)) in zip(axes[0], arrows.items()):
        if background is not None:
            inputs, labels = background
            ax.scatter(inputs[:, 0], inputs[:, 1], c=labels, s=4, cmap='coolwarm', alpha=0.4)
        color = METHOD_COLORS.get(name, '#444444')
        draws = np.atleast_2d(draws)
        ax.quiver(np.full(len(draws), point[0]), np.full(len(draws), point[1]), draws[:, 0], draws[:, 1],
                  color=color, alpha=0.35, angles='xy', scale_units='xy', scale=None, width=0.004)
        ax.quiver([point[0]], [point[1]], [mean[0]], [mean[1]], color=color,
                  angles='xy', scale_units='xy', scale=None, width=0.012)
        ax.plot(point[0], point[1], 'k*', markersize=8)
        ax.set_title(name)
        ax.set_aspect('equal')
    fig.tight_layout()
    save(fig, path)


def quiver_figure(xs: np.ndarray, ys: np.ndarray, fields: Dict[str, Tuple[np.ndarray, np.ndarray]], path: str):
    """Gradient fields sampled on the grid (xs, ys), one panel per field"""
    gx, gy = np.meshgrid(xs, ys)
    fig, axes = new(1, len(fields))
    for ax, (name, (u, v)) in zip(axes[0], fields.items()):
        ax.quiver(gx, gy, u, v, color=METHOD_COLORS.get(name, '#444444'), angles='xy')
        ax.set_title(name)
        ax.set_aspect('equal')
    fig.tight_layout()
    save(fig, path)


def heatmap_figure(grid: np.ndarray, row_labels: Sequence[float], col_labels: Sequence[float], path: str,
                   row_name: str = '', col_name: str = '', title: str = ''):
    fig, axes = new(size=(4.8, 4.0))
    ax = axes[0][0]
    image = ax.imshow(grid, cmap='viridis', origin='lower', aspect='auto')
    ax.set_xticks(range(len(col_labels)))
    ax.set_xticklabels([f"{c:g}" for c in col_labels], rotation=45)
    ax.set_yticks(range(len(row_labels)))
    ax.set_yticklabels([f"{r:g}" for r in row_labels])
    ax.set_xlabel(col_name)
    ax.set_ylabel(row_name)
    ax.set_title(title)
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    save(fig, path)


def curve_figure(x: Sequence[float], y: Sequence[float], path: str, xlabel: str = '', ylabel: str = '',
                 vline: Optional[float] = None):
    fig, axes = new()
    ax = axes[0][0]
    ax.plot(x, y, 'o-', color=METHOD_COLORS['ng'])
    if vline is not None:
        ax.axvline(vline, color='k', linestyle='--', linewidth=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    save(fig, path)
