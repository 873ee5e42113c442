"""Question-answer meaning representations: graph induction, filtering and scoring."""

__version__ = "0.1.0"

from .model import (AnswerSet, GenericGraph, GoldArc, Judgment, Qamr, QAPair, RawAnnotation,
                    Sentence, Span, ValidationError, Verdict, contiguous_runs, normalize_token)

__all__ = [
    "__version__", "AnswerSet", "GenericGraph", "GoldArc", "Judgment", "Qamr", "QAPair",
    "RawAnnotation", "Sentence", "Span", "ValidationError", "Verdict", "contiguous_runs",
    "normalize_token",
]
