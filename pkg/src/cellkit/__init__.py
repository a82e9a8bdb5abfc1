"""Exact Kazhdan-Lusztig combinatorics for finite Weyl groups.

Subpackages cover the group models (:mod:`cellkit.coxeter`), the Hecke
algebra with its canonical basis and structure constants
(:mod:`cellkit.hecke`), cell partitions and the a-function
(:mod:`cellkit.cells`), the asymptotic t-basis ring
(:mod:`cellkit.asymptotic`), graded characters of translated simple
modules (:mod:`cellkit.homology`) and the combinatorial annihilator
classifiers (:mod:`cellkit.kostant`).  ``cellkit.cli`` exposes the same
surface as a command line tool.
"""

from cellkit.coxeter import (
    CoxeterSystem,
    Element,
    bruhat_leq,
    create_system,
    inverse,
    left_descents,
    length,
    longest_element,
    multiply,
    right_descents,
)

__version__ = "0.1.0"

__all__ = [
    "CoxeterSystem",
    "Element",
    "bruhat_leq",
    "create_system",
    "inverse",
    "left_descents",
    "length",
    "longest_element",
    "multiply",
    "right_descents",
    "__version__",
]
