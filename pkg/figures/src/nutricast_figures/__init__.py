"""Figure rendering for nutricast output tables.

Reads only the pipeline's documented delimited-text artifacts (grid and
prediction tables with '#' metadata lines) and renders south-polar maps,
ESM-minus-model difference panels and confidence-band plots as PNG.
"""

from .render import MissingColumns, PlotSpec, read_table, render_ci_band, render_map

__version__ = "0.1.0"

__all__ = ["MissingColumns", "PlotSpec", "read_table", "render_ci_band", "render_map"]
