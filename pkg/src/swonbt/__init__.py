"""Branching-time logic of strong and weak ontic necessity.

Parse formulas, evaluate them over finite tree models with rule-based
contexts, rewrite to normal forms, decide satisfiability and validity
with replayable counter-models, and verify Hilbert-style derivations.
"""

from .context import (
    Context,
    Hierarchy,
    accepted,
    context_from_ae,
    en,
    expected,
    hierarchy,
    load_context,
    make_context,
)
from .decide import (
    OracleBounds,
    ValidityResult,
    Verdict,
    Witness,
    bounds_for,
    brute_force_satisfiable,
    satisfiable,
    valid,
)
from .formula import Formula, Fragment, classify, is_closed, parse, print_formula
from .model import TreeModel, Timeline, load_model, validate_model
from .proofcheck import check_derivation, load_derivation, match_axiom
from .rewrite import CoreFormula, atomic_sequences, basic_sequence, delta, dnf_xxyy, gamma, to_core
from .semantics import AEPoint, ContextualizedPoint, check, check_ae, find_counterpoint

__all__ = [
    "AEPoint",
    "Context",
    "ContextualizedPoint",
    "CoreFormula",
    "Formula",
    "Fragment",
    "Hierarchy",
    "OracleBounds",
    "Timeline",
    "TreeModel",
    "ValidityResult",
    "Verdict",
    "Witness",
    "accepted",
    "atomic_sequences",
    "basic_sequence",
    "bounds_for",
    "brute_force_satisfiable",
    "check",
    "check_ae",
    "check_derivation",
    "classify",
    "context_from_ae",
    "delta",
    "dnf_xxyy",
    "en",
    "expected",
    "find_counterpoint",
    "gamma",
    "hierarchy",
    "is_closed",
    "load_context",
    "load_derivation",
    "load_model",
    "make_context",
    "match_axiom",
    "parse",
    "print_formula",
    "satisfiable",
    "to_core",
    "valid",
    "validate_model",
]
