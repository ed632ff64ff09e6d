"""Label-preserving refactorings used to generate transformed code."""

from mixcode.refactor.methods import (
    ALL_METHODS, SEMANTIC_METHODS, Analysis, Method, NoApplicableMethod,
    NotApplicable, RefactorOutcome, applicable, apply, choose, random_refactor,
    refactor_or_identity,
)
from mixcode.refactor.synonyms import DEFAULT_SYNONYMS, SynonymTable


def parse_methods(spec: str) -> frozenset:
    """Parse a comma-separated method list; ``all`` selects the whole catalogue."""
    spec = spec.strip()
    if spec in ("", "all"):
        return frozenset(ALL_METHODS)
    return frozenset(Method.parse(part) for part in spec.split(",") if part.strip())


__all__ = [
    "ALL_METHODS", "DEFAULT_SYNONYMS", "SEMANTIC_METHODS", "Analysis", "Method",
    "NoApplicableMethod", "NotApplicable", "RefactorOutcome", "SynonymTable",
    "applicable", "apply", "choose", "parse_methods", "random_refactor",
    "refactor_or_identity",
]
