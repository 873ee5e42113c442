"""Validator-judgment aggregation, question filtering and corpus statistics."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .ingest import AnnotationCorpus
from .model import AnswerSet, Qamr, QAPair, RawAnnotation, Sentence, Verdict, normalize_token
from .text import is_punct, is_wh_question

__all__ = [
    "Status", "ValidatedQA", "FilterStats", "SplitStats", "aggregate", "is_wh_question",
    "filter_corpus", "to_qamrs", "validity_check", "corpus_stats", "format_stats_table",
]


class Status(str, enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    REDUNDANT = "redundant"


@dataclass(frozen=True)
class ValidatedQA:
    pair: QAPair
    writer_answer: AnswerSet
    validator_answers: tuple
    status: Status
    unvalidated: bool = False


def aggregate(annotation: RawAnnotation) -> ValidatedQA:
    """Combine the judgments on one question; any Invalid or Redundant vote wins."""
    verdicts = {j.verdict for j in annotation.judgments}
    if Verdict.INVALID in verdicts:
        status = Status.INVALID
    elif Verdict.REDUNDANT in verdicts:
        status = Status.REDUNDANT
    else:
        status = Status.VALID
    return ValidatedQA(
        pair=annotation.to_pair(),
        writer_answer=annotation.writer_answer,
        validator_answers=tuple(j.answer for j in annotation.judgments if j.answer is not None),
        status=status,
        unvalidated=not annotation.judgments,
    )


@dataclass
class SplitStats:
    split: str
    sentences: int = 0
    qa_pairs: int = 0
    valid: int = 0
    filtered: int = 0


@dataclass
class FilterStats:
    total_questions: int = 0
    valid_both: int = 0
    wh_pass: int = 0
    unvalidated: int = 0
    splits: list = field(default_factory=list)

    @property
    def filtered_total(self) -> int:
        return self.wh_pass

    @property
    def valid_rate(self) -> float:
        return self.valid_both / self.total_questions if self.total_questions else 0.0

    @property
    def wh_rate(self) -> float:
        return self.wh_pass / self.valid_both if self.valid_both else 0.0

    def to_records(self) -> list:
        """One record per split plus a totals record. Rates are percentages, 2 d.p."""
        records = [dict(kind="split", **asdict(s)) for s in self.splits]
        records.append({
            "kind": "total",
            "total_questions": self.total_questions,
            "valid_both": self.valid_both,
            "valid_rate_pct": round(100 * self.valid_rate, 2),
            "wh_pass": self.wh_pass,
            "wh_rate_pct": round(100 * self.wh_rate, 2),
            "filtered_total": self.filtered_total,
            "unvalidated": self.unvalidated,
        })
        return records


def _is_valid(ann: RawAnnotation, require_judgments: int) -> bool:
    if len(ann.judgments) < require_judgments:
        return False
    return aggregate(ann).status is Status.VALID


def filter_corpus(corpus: AnnotationCorpus, require_judgments: int = 0):
    """Keep Valid, wh-initial questions. Returns ``(filtered corpus, FilterStats)``.

    The filtered corpus keeps every sentence and the input order of the
    surviving annotations.
    """
    kept = []
    stats = FilterStats()
    row = SplitStats(corpus.split_label or "all", sentences=len(corpus.sentences))
    for ann in corpus.annotations:
        stats.total_questions += 1
        if not ann.judgments:
            stats.unvalidated += 1
        if not _is_valid(ann, require_judgments):
            continue
        stats.valid_both += 1
        if is_wh_question(ann.question):
            stats.wh_pass += 1
            kept.append(ann)
    row.qa_pairs, row.valid, row.filtered = stats.total_questions, stats.valid_both, stats.wh_pass
    stats.splits.append(row)
    out = AnnotationCorpus(dict(corpus.sentences), kept, corpus.split_label)
    return out, stats


def to_qamrs(corpus: AnnotationCorpus) -> dict:
    """Group a corpus's questions into one :class:`Qamr` per sentence."""
    pairs = {sid: [] for sid in corpus.sentences}
    for ann in corpus.annotations:
        pairs[ann.sentence_id].append(ann.to_pair())
    return {sid: Qamr(sid, tuple(p)) for sid, p in pairs.items()}


def validity_check(question: Sequence[str], sentence: Sentence) -> list:
    """Report mechanically checkable validity violations.

    Only two criteria can be checked without a human: sharing a word with the
    sentence (``"criterion-1"``) and a wh-initial form as a proxy for not being
    a yes/no question (``"criterion-4-proxy"``). Meaning, answerability and
    redundancy are left to validators.
    """
    sent_words = {normalize_token(t) for t in sentence.tokens if not is_punct(t)}
    violations = []
    if not any(normalize_token(t) in sent_words for t in question if not is_punct(t)):
        violations.append("criterion-1")
    if not is_wh_question(question):
        violations.append("criterion-4-proxy")
    return violations


def corpus_stats(corpora: Iterable[AnnotationCorpus], require_judgments: int = 0) -> FilterStats:
    """Per-split sentence, QA and filtered counts, plus overall totals."""
    total = FilterStats()
    for corpus in corpora:
        _, s = filter_corpus(corpus, require_judgments)
        total.total_questions += s.total_questions
        total.valid_both += s.valid_both
        total.wh_pass += s.wh_pass
        total.unvalidated += s.unvalidated
        total.splits.extend(s.splits)
    return total


def format_stats_table(stats: FilterStats) -> str:
    header = ["", *(s.split for s in stats.splits), "Total"]
    rows = [
        ("Sentences", [s.sentences for s in stats.splits]),
        ("QA Pairs", [s.qa_pairs for s in stats.splits]),
        ("Valid", [s.valid for s in stats.splits]),
        ("Filtered", [s.filtered for s in stats.splits]),
    ]
    table = [header]
    for name, vals in rows:
        table.append([name, *(f"{v:,}" for v in vals), f"{sum(vals):,}"])
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in table]
    lines.append(f"valid rate {100 * stats.valid_rate:.2f}%  "
                 f"wh-pass rate {100 * stats.wh_rate:.2f}%  "
                 f"unvalidated {stats.unvalidated:,}")
    return "\n".join(lines)
