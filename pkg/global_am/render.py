"""Grayscale rendering of AM results: a binary PGM plus an SVG wrapper embedding a PNG."""

import base64
import io
import logging
import os
from typing import Sequence, Tuple

import numpy as np
from PIL import Image

from utils.errors import DimensionError

logger = logging.getLogger(__name__)

SVG_PIXEL_SCALE = 16


def normalize(x: np.ndarray) -> np.ndarray:
    """Min/max rescale to [0, 1]; a constant input maps to zeros"""
    x = np.asarray(x, dtype=np.float64)
    span = x.max() - x.min()
    if span == 0:
        return np.zeros_like(x)
    return (x - x.min()) / span


def _to_uint8(x_star: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    x_star = np.asarray(x_star, dtype=np.float64)
    if int(np.prod(shape)) != x_star.size:
        raise DimensionError(f"cannot render {x_star.size} values as {tuple(shape)}")
    if len(shape) == 1:
        shape = (1, shape[0])
    return np.round(normalize(x_star).reshape(shape) * 255).astype(np.uint8)


def am_render(x_star: np.ndarray, shape: Sequence[int], path_stem: str) -> Tuple[str, str]:
    """Write <stem>.pgm and <stem>.svg; returns both paths"""
    pixels = _to_uint8(x_star, shape)
    image = Image.fromarray(pixels)
    pgm_path = f"{path_stem}.pgm"
    svg_path = f"{path_stem}.svg"
    image.save(pgm_path)

    png = io.BytesIO()
    image.save(png, format='PNG')
    encoded = base64.b64encode(png.getvalue()).decode('ascii')
    height, width = pixels.shape
    with open(svg_path, 'w', encoding='utf-8') as f:
        f.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width * SVG_PIXEL_SCALE}" '
            f'height="{height * SVG_PIXEL_SCALE}" viewBox="0 0 {width} {height}">\n'
            f'  <image width="{width}" height="{height}" style="image-rendering:pixelated" '
            f'href="data:image/png;base64,{encoded}"/>\n'
            f'</svg>\n')

    logger.info(f"Rendered {os.path.basename(path_stem)} ({height}x{width})")
    return pgm_path, svg_path


def read_graymap(path: str) -> np.ndarray:
    """Pixels of a graymap scaled back to [0, 1]"""
    with Image.open(path) as image:
        return np.asarray(image.convert('L'), dtype=np.float64) / 255.0
