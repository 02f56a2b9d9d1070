"""Definite clauses with negation as failure: terms, unification, solving."""
from .solver import (
    BUILTINS,
    DEFAULT_BUDGET,
    BudgetExceeded,
    FailedAttempt,
    FailedGoal,
    FlounderingNegation,
    InstantiationError,
    LogicError,
    ProofTrace,
    ReplayError,
    Solution,
    Solver,
    UnknownPredicate,
    explain_failure,
    holds_not,
    replay,
    solve,
)
from .terms import (
    BodyItem,
    Clause,
    Compound,
    Const,
    Literal,
    Naf,
    RuleSet,
    Scenario,
    SourceSpan,
    Term,
    Var,
    alpha_equivalent,
    atom,
    canonical,
    clause_vars,
    is_ground,
)
from .unify import Substitution, apply, apply_literal, is_idempotent, unify, unify_literals

__all__ = [
    "BUILTINS",
    "DEFAULT_BUDGET",
    "BodyItem",
    "BudgetExceeded",
    "Clause",
    "Compound",
    "Const",
    "FailedAttempt",
    "FailedGoal",
    "FlounderingNegation",
    "InstantiationError",
    "Literal",
    "LogicError",
    "Naf",
    "ProofTrace",
    "ReplayError",
    "RuleSet",
    "Scenario",
    "Solution",
    "Solver",
    "SourceSpan",
    "Substitution",
    "Term",
    "UnknownPredicate",
    "Var",
    "alpha_equivalent",
    "apply",
    "apply_literal",
    "atom",
    "canonical",
    "clause_vars",
    "explain_failure",
    "holds_not",
    "is_ground",
    "is_idempotent",
    "replay",
    "solve",
    "unify",
    "unify_literals",
]
