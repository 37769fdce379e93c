"""Batch renderer for the radar experiment CSV contract."""

__version__ = "0.1.0"

from .render import FigureSpec, render, render_figure
from .schemas import SchemaError

__all__ = ["FigureSpec", "SchemaError", "render", "render_figure"]
