"""CSV to SVG figure rendering for pellclass outputs."""

__version__ = "0.1.0"
