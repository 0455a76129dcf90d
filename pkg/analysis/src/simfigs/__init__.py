"""Post-processing figures for simulation CSV/JSON outputs.

Reads the versioned CSV schemas emitted by the experiment CLI and renders
publication-style figures.  Pure reshaping and plotting: this package never
recomputes physics and does not depend on the simulation library.
"""

from .csvio import SchemaError, read_table
from .figures import FIGURE_KINDS, FigureSpec, render

__version__ = "0.1.0"
