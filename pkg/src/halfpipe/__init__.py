"""Geometric transition of bent hyperbolic and anti-de Sitter structures.

The package computes with the projective models of H3, AdS3 and the
degenerate half-pipe geometry HP3 that interpolates between them: isometries
and their rescaled limits, Fuchsian punctured-torus groups and measured
multicurves, bending cocycles and pleated surfaces, holonomy transition
families, and the doubling construction that produces cone/cusp structures
on the product of a surface with a circle.
"""

from halfpipe.geometry import ADS, HP, HYP, Geometry

__all__ = ["Geometry", "HYP", "ADS", "HP"]
__version__ = "0.1.0"
