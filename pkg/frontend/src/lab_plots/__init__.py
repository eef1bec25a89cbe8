"""Figure rendering for the laboratory's CSV/JSON artifacts.

This package is a pure consumer of the CSV contract published by the
experiment driver: stage series (``stage,radius,point_index,x,value``) and
semigroup traces (``t,x,value``).  It performs no numerics beyond what is
needed to annotate a figure.
"""

from .figures import FIGURE_KINDS, FigureError, FigureSpec, render

__all__ = ["FIGURE_KINDS", "FigureError", "FigureSpec", "render"]
