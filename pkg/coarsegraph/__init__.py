"""
coarsegraph
===========
Constructions, certificates and brute-force oracles for fat minors,
quasi-isometries, power graphs and tree decompositions of finite graphs.
"""

__version__ = "1.0.0"
