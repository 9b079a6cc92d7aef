"""Figure rendering for votemetrics CSV outputs."""

__version__ = "0.1.0"

from .figures import FigureSpec, SchemaError, render

__all__ = ["FigureSpec", "SchemaError", "render"]
