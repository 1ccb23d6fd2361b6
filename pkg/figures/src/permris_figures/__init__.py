"""permris-figures: render permris CSV outputs into publication figures."""

from .render import FigureSpec, SchemaError, render

__version__ = "0.1.0"
