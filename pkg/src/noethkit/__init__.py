"""noethkit: a symbolic workbench for Noetherian-style topologies.

Spaces built from finite quasi-orders, naturals, sums, products, words,
trees and ordinal-length words; symbolic open/closed subsets with exact
membership and brute-force extent oracles; topology refinement rules
iterated to (bounded) fixed points; divisibility preorders over inductive
datatypes; and a backward-coverability engine for monotone transition
systems on top of it all.
"""

__version__ = "0.1.0"
