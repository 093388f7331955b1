"""Numerical laboratory for eigenfunctions of partially rectangular billiards.

Computes Laplacian eigenfunctions of Bunimovich stadia, Sinai billiards,
squares with obstacles, and barrier billiards on masked finite-difference
grids, and measures control/non-concentration properties: mass lower bounds
near edges and obstacles, per-mode 1D observability constants, resolvent
control ratios, Husimi phase-space statistics, and classical geometric
control diagnostics.
"""

__version__ = "0.1.0"
