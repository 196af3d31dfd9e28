"""closurelab: desk-scale structure measurements on GF(2) Cayley graphs.

Packed GF(2) linear algebra, tensor-space rank-one combinatorics, exact
integer Walsh-Hadamard analysis, closedness measurement, forcing-multiset
experiments, and layered Hamming counterexample tooling.
"""

__version__ = "0.1.0"
