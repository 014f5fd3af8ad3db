"""Figure rendering for guided-abc run outputs."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, FigureRequest, median_and_quartiles, render
from .io import MissingColumnError

__all__ = [
    "__version__",
    "FIGURE_KINDS",
    "FigureRequest",
    "median_and_quartiles",
    "render",
    "MissingColumnError",
]
