"""Workbench comparing k-fold sumsets with difference sets.

Modules: ``setcore`` (exact set arithmetic), ``construction`` (the recursive
small-sumset construction), ``oracles`` (exhaustive extremal values),
``transforms`` (lifts, projections, coverings), ``inequalities`` (empirical
checkers), ``cli``.
"""

__version__ = "0.1.0"
