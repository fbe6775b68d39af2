"""Figure rendering for cfmimo experiment CSVs."""

__version__ = "0.1.0"

from cfplots.render import FigureSpec, SchemaError, parse_table, render, spec_for

__all__ = ["FigureSpec", "SchemaError", "parse_table", "render", "spec_for", "__version__"]
