"""Numerical toolkit for thin-shell displacement fields.

Builds shell mid-surfaces in principal curvature coordinates, discretizes
displacement fields on tensor grids over the thickness, assembles the
frame-components gradient and strain, and measures how the optimal constants
of Korn-type inequalities scale with the shell thickness.  A companion 2-d
module checks the gradient-separation estimates for harmonic functions on
thin rectangles that underpin those scalings.
"""

from kornshell.backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
