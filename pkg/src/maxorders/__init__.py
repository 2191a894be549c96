"""Exact-arithmetic workbench for monoids given by monomial relations.

Submodules: ``presentations`` (rewriting), ``lattice`` (integer linear
algebra), ``affine`` (affine monoids), ``groups`` (virtually abelian
extension data), ``crossed`` (crossed systems and the maximal order
criterion) and ``cli``.
"""

__version__ = "0.1.0"
