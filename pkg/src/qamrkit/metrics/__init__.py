"""Scorers: concept agreement, unlabeled SMATCH, SRL-arc coverage, QA and QG."""

from .concepts import NodeMatchConfig, concept_agreement
from .prf import PRF
from .qa import answer_em, answer_f1, bleu, multi_bleu, normalize_answer, qg_pr
from .smatch import BACKEND, SizeError, smatch_exact, unlabeled_smatch
from .srl import Alignment, align_qa, align_sentence, arc_recall, recall_curve, relative_overlap

__all__ = [
    "PRF", "NodeMatchConfig", "concept_agreement", "unlabeled_smatch", "smatch_exact",
    "SizeError", "BACKEND", "align_qa", "align_sentence", "arc_recall", "recall_curve",
    "relative_overlap", "Alignment", "answer_em", "answer_f1", "bleu", "multi_bleu",
    "normalize_answer", "qg_pr",
]
