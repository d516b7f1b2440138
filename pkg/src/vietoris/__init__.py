"""Exact-arithmetic toolkit for enumeration names of compact subsets of the
truncated cube: upper/lower Vietoris information, invariant semideciders, and
a minimality reconstruction engine that upgrades upper names to lower names
and renders the recovered set.
"""

__all__ = [
    "geometry",
    "names",
    "invariants",
    "homotopy",
    "zoo",
    "reconstruct",
    "cli",
]

__version__ = "0.1.0"
