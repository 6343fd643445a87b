"""Projective planes of order 16, unitals, and the group machinery to
classify them."""

__version__ = "0.1.0"

from .canon import Certificate, are_isomorphic, automorphism_group, canonical_form
from .finite_geometry import GF, build_pg2, hermitian_unital
from .formats import embedded_catalog, load_plane, parse_unital_catalog, write_unital_catalog
from .incidence import ColoredGraph, IncidenceStructure, to_incidence_graph, validate_design
from .permgroup import Permutation, schreier_sims
from .search import SearchConfig, find_unitals
from .unitals import classify_nonisomorphic, is_unital, stabilizer_order

__all__ = [
    "Certificate", "are_isomorphic", "automorphism_group", "canonical_form",
    "GF", "build_pg2", "hermitian_unital",
    "embedded_catalog", "load_plane", "parse_unital_catalog", "write_unital_catalog",
    "ColoredGraph", "IncidenceStructure", "to_incidence_graph", "validate_design",
    "Permutation", "schreier_sims",
    "SearchConfig", "find_unitals",
    "classify_nonisomorphic", "is_unital", "stabilizer_order",
]
