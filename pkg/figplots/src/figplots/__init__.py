"""Batch renderer for csfg sweep CSVs: metric curves and transfer-map heatmaps."""

from .render import render
from .spec import FigureSpec, SpecError

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SpecError", "render", "__version__"]
