"""Generalized Kahler structures on mapping tori of Inoue-type 3-tori.

Submodules: ``symforms`` (symbolic forms in one time variable), ``inoue``
(lattice data from SL(3, Z) matrices), ``gk`` (assembly and verification),
``cohomology`` (mapping-torus and Dolbeault tables), ``formality`` (CDGA
cohomology and non-formality criteria), ``cli``.
"""

from . import cohomology, formality, gk, inoue, linalg, symforms
from .gk import FlatFiber, FiberMap, FrameFamily, assemble_gk, classify_split, verify_gk
from .inoue import classify_spectrum, enumerate_admissible, parameters_from_matrix

__version__ = "0.1.0"

__all__ = [
    "cohomology", "formality", "gk", "inoue", "linalg", "symforms",
    "FlatFiber", "FiberMap", "FrameFamily", "assemble_gk", "classify_split", "verify_gk",
    "classify_spectrum", "enumerate_admissible", "parameters_from_matrix",
]
