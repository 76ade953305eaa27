"""Tropical lower bounds for secant dimensions of equivariant embeddings."""

from .certificates import (
    APReport,
    Certificate,
    Leaf,
    Node,
    certificate_from_json,
    certificate_to_json,
    glue_stack,
    make_certificate,
    verify_certificate,
    verify_partition,
)
from .geometry import AffineFunctional, affine_dim, induce_partition_lp, winners
from .induction import search_by_induction
from .models import Model, ModelSpec, Variety, build_model, capping_k, expected_cone_dim
from .oracle import OracleReport, psi_eval, terracini_dim, terracini_report
from .report import theorem_table
from .search import SearchConfig, SearchResult, search_certificate
from .sl3 import build_sl3_module, compute_M_and_Ab, k1_tropical_sanity
from .svg import emit_svg
from .theorems import known_defects, true_cone_dims

__all__ = [
    "APReport", "AffineFunctional", "Certificate", "Leaf", "Model", "ModelSpec", "Node",
    "OracleReport", "SearchConfig", "SearchResult", "Variety", "affine_dim", "build_model",
    "build_sl3_module", "capping_k", "certificate_from_json", "certificate_to_json",
    "compute_M_and_Ab", "emit_svg", "expected_cone_dim", "glue_stack", "induce_partition_lp",
    "k1_tropical_sanity", "known_defects", "make_certificate", "psi_eval", "search_by_induction",
    "search_certificate", "terracini_dim", "terracini_report", "theorem_table", "true_cone_dims",
    "verify_certificate", "verify_partition", "winners",
]
