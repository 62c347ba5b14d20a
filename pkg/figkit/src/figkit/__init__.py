"""Publication-style figures from qdcascade CSV outputs.

No simulation logic lives here: the package consumes the harness's
results CSVs and ridge-fit JSONs and renders deterministic images.
"""

from .recipes import EmptyData, FigureRecipe, MissingColumn, load_recipe
from .render import render

__all__ = ["FigureRecipe", "load_recipe", "render", "MissingColumn", "EmptyData"]

__version__ = "0.1.0"
