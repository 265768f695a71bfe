"""locc-forge: synthesize, certify, and verify LOCC protocols for separable
multipartite quantum measurements."""

from .catalog import (
    phase_five,
    qubit_pair,
    rotated_dominoes,
    seven_outcome_family,
)
from .cones import RayDecomposition, decompose, extreme_rays
from .engine import (
    Certificate,
    ProtocolNode,
    SearchStats,
    Verdict,
    check_root,
    ordering_bound,
    synthesize,
)
from .feasibility import (
    FeasibleCone,
    NodeContext,
    build_q,
    factorize,
    feasible_cone,
    reconstruct,
    root_context,
)
from .io import load_measurement, load_tree, save_measurement, save_tree
from .measurement import (
    Party,
    SeparableMeasurement,
    complement_span,
    infer_weights,
    local_span,
    validate,
)
from .operators import (
    OperatorBasis,
    dual_basis,
    frobenius,
    independent_subset,
    is_psd,
    tensor,
)
from .tolerances import DEFAULT_TOL, Tolerances
from .verify import random_density_matrix, simulate, verify_tree

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "DEFAULT_TOL",
    "FeasibleCone",
    "NodeContext",
    "OperatorBasis",
    "Party",
    "ProtocolNode",
    "RayDecomposition",
    "SearchStats",
    "SeparableMeasurement",
    "Tolerances",
    "Verdict",
    "build_q",
    "check_root",
    "complement_span",
    "decompose",
    "dual_basis",
    "extreme_rays",
    "factorize",
    "feasible_cone",
    "frobenius",
    "independent_subset",
    "infer_weights",
    "is_psd",
    "load_measurement",
    "load_tree",
    "local_span",
    "ordering_bound",
    "phase_five",
    "qubit_pair",
    "random_density_matrix",
    "reconstruct",
    "root_context",
    "rotated_dominoes",
    "save_measurement",
    "save_tree",
    "seven_outcome_family",
    "simulate",
    "synthesize",
    "tensor",
    "validate",
    "verify_tree",
]
