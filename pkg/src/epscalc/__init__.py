"""Proof transformations for the epsilon calculus.

The package implements the classical pipeline: translate quantified proofs
into epsilon-calculus proofs, eliminate critical formulas rank by rank to
obtain Herbrand disjunctions with full complexity accounting, reconstruct
quantified proofs from such disjunctions, and certify the hyperexponential
lower bound on Herbrand complexity for a family of short proofs.
"""

import sys

# Elimination runs produce right-nested disjunctions whose depth equals the
# number of disjuncts; tree walks recurse along that spine.
if sys.getrecursionlimit() < 30000:
    sys.setrecursionlimit(30000)

from .syntax import (  # noqa: E402
    Expr, FreeVar, BoundVar, FuncApp, PredApp, Neg, And, Or, Imp,
    Forall, Exists, Eps, ExprClass, Signature, NameSupply,
    classify, alpha_eq, canon, substitute, instantiate, replace_eps,
    subterms, immediate_subterms, degree, rank, subordinate,
)
from .parser import parse_formula, parse_term, print_expr, ParseError  # noqa: E402
from .proofs import (  # noqa: E402
    Proof, ProofBuilder, Step, Taut, Crit, ExAx, ForallAx, MP,
    GenForall, GenExists, Hyp, check, metrics, is_tautology,
    find_countermodel, deduction, case_combine, compile_witness,
)
from .embedding import eps_translate, embed_proof  # noqa: E402
from .elimination import (  # noqa: E402
    Expansion, EliminationTrace, HerbrandDisjunction, hyperexp,
    select_target, eliminate_term, eliminate_rank, extract_herbrand,
)
from .herbrand import (  # noqa: E402
    prenex_parts, herbrand_normal_form, hnf_proof, herbrand_to_pc,
    second_epsilon,
)
from .lowerbound import (  # noqa: E402
    lb_signature, make_Ek, least_model, check_lower_bound, build_Ek_proof,
)

__all__ = [
    "Expr", "FreeVar", "BoundVar", "FuncApp", "PredApp", "Neg", "And", "Or",
    "Imp", "Forall", "Exists", "Eps", "ExprClass", "Signature", "NameSupply",
    "classify", "alpha_eq", "canon", "substitute", "instantiate",
    "replace_eps", "subterms", "immediate_subterms", "degree", "rank",
    "subordinate",
    "parse_formula", "parse_term", "print_expr", "ParseError",
    "Proof", "ProofBuilder", "Step", "Taut", "Crit", "ExAx", "ForallAx",
    "MP", "GenForall", "GenExists", "Hyp", "check", "metrics",
    "is_tautology", "find_countermodel", "deduction", "case_combine",
    "compile_witness",
    "eps_translate", "embed_proof",
    "Expansion", "EliminationTrace", "HerbrandDisjunction", "hyperexp",
    "select_target", "eliminate_term", "eliminate_rank", "extract_herbrand",
    "prenex_parts", "herbrand_normal_form", "hnf_proof", "herbrand_to_pc",
    "second_epsilon",
    "lb_signature", "make_Ek", "least_model", "check_lower_bound",
    "build_Ek_proof",
]
