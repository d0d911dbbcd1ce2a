"""Certification and Bell-inequality analysis of multi-source quantum networks."""

from .bell import (
    BellEvaluation,
    VisibilityBound,
    bell_value,
    closed_form_max,
    critical_visibility,
    evaluate,
    lemma1_check,
    noisy_sufficient,
    optimize_angles,
    small_theta_strategy,
)
from .independence import (
    BipartiteDecomposition,
    IndependenceCertificate,
    certify_independence,
    decompose,
    find_certificate,
    hopcroft_karp,
    kmax_exact,
    subset_search,
)
from .lhv import HiddenStateModel, LocalStrategy, classical_IJ, max_classical_F
from .network import (
    GeneralizedEPR,
    GeneralizedGHZ,
    NetworkTopology,
    PauliCoefficientState,
    SchmidtBlockBipartite,
    Source,
    Werner,
    gallery,
    parse_network,
    serialize,
)
from .quantum import build_state, expectation, factorized_IJ, full_tensor_IJ

__version__ = "0.1.0"

__all__ = [
    "BellEvaluation",
    "BipartiteDecomposition",
    "GeneralizedEPR",
    "GeneralizedGHZ",
    "HiddenStateModel",
    "IndependenceCertificate",
    "LocalStrategy",
    "NetworkTopology",
    "PauliCoefficientState",
    "SchmidtBlockBipartite",
    "Source",
    "VisibilityBound",
    "Werner",
    "bell_value",
    "build_state",
    "certify_independence",
    "classical_IJ",
    "closed_form_max",
    "critical_visibility",
    "decompose",
    "evaluate",
    "expectation",
    "factorized_IJ",
    "find_certificate",
    "full_tensor_IJ",
    "gallery",
    "hopcroft_karp",
    "kmax_exact",
    "lemma1_check",
    "max_classical_F",
    "noisy_sufficient",
    "optimize_angles",
    "parse_network",
    "serialize",
    "small_theta_strategy",
    "subset_search",
]
