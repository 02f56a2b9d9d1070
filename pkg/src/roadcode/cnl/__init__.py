"""Controlled-English front end: parse ``.rules`` text, render logic back to English."""
from .parser import (
    AmbiguousTemplate,
    CNLError,
    CNLSyntaxError,
    Document,
    NoTemplateForPredicate,
    UnresolvedDefiniteReference,
    lower,
    parse_document,
    parse_literal,
    parse_vocabulary,
    tokenize,
)
from .render import (
    RenderError,
    phrase_of,
    render_clause,
    render_document,
    render_failure,
    render_literal,
    render_rules,
    render_scenario,
    render_term,
    render_trace,
)
from .templates import BUILTIN_TEMPLATES, Slot, Template, Vocabulary

__all__ = [
    "AmbiguousTemplate",
    "BUILTIN_TEMPLATES",
    "CNLError",
    "CNLSyntaxError",
    "Document",
    "NoTemplateForPredicate",
    "RenderError",
    "Slot",
    "Template",
    "UnresolvedDefiniteReference",
    "Vocabulary",
    "lower",
    "parse_document",
    "parse_literal",
    "parse_vocabulary",
    "phrase_of",
    "render_clause",
    "render_document",
    "render_failure",
    "render_literal",
    "render_rules",
    "render_scenario",
    "render_term",
    "render_trace",
    "tokenize",
]
