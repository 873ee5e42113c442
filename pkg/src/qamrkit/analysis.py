"""Question-language analyses: wh-word distribution and external phrases."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .model import normalize_token
from .text import WH_WORDS, is_punct, load_stopwords, stopword_hash

TYPING_WH = ("who", "what", "which", "how")


@dataclass(frozen=True)
class Rate:
    count: int
    total: int

    @property
    def value(self) -> float:
        return self.count / self.total if self.total else 0.0

    @property
    def empty(self) -> bool:
        return self.total == 0


@dataclass(frozen=True)
class PhraseCount:
    phrase: tuple
    count: int
    after_wh: int = 0

    @property
    def category(self) -> str:
        return "after-wh" if 2 * self.after_wh > self.count else "other"


@dataclass
class ExternalPhraseReport:
    phrases: list
    questions: Rate
    stopword_hash: str
    occurrences: int = 0
    unique_after_wh: int = 0

    def top(self, k: int = 50) -> list:
        return self.phrases[:k]


@dataclass
class WhHistogram:
    counts: dict = field(default_factory=dict)
    other: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def fractions(self) -> dict:
        t = self.total
        return {w: c / t for w, c in self.counts.items()} if t else {}


def _questions(corpus):
    for ann in corpus.annotations:
        yield ann.question, corpus.sentences[ann.sentence_id].tokens


def wh_distribution(corpus) -> WhHistogram:
    """Counts of questions by case-folded first token, over the eight wh-words.

    Only wh-words that occur appear in ``counts``; non-wh questions are
    tallied in ``other``.
    """
    hist = WhHistogram()
    counts = Counter()
    for question, _ in _questions(corpus):
        first = normalize_token(question[0])
        if first in WH_WORDS:
            counts[first] += 1
        else:
            hist.other += 1
    hist.counts = {w: counts[w] for w in WH_WORDS if counts[w]}
    return hist


def question_external_phrases(question, sentence_tokens, stopwords) -> list:
    """Maximal runs of question tokens absent from the sentence, as ``(start, end)``.

    A token belongs to a run if it is not punctuation, not a stopword and its
    case-folded form is not a sentence token.
    """
    sent = {normalize_token(t) for t in sentence_tokens}
    runs = []
    start = None
    for i, tok in enumerate(question):
        w = normalize_token(tok)
        external = not is_punct(tok) and w not in stopwords and w not in sent
        if external and start is None:
            start = i
        elif not external and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(question)))
    return runs


def external_phrases(corpus, stopwords: Optional[frozenset] = None) -> ExternalPhraseReport:
    if stopwords is None:
        stopwords = load_stopwords()
    counts = Counter()
    after = Counter()
    with_ext = total = 0
    for question, sent in _questions(corpus):
        total += 1
        runs = question_external_phrases(question, sent, stopwords)
        if runs:
            with_ext += 1
        for s, e in runs:
            phrase = tuple(normalize_token(t) for t in question[s:e])
            counts[phrase] += 1
            if s > 0 and normalize_token(question[s - 1]) in TYPING_WH:
                after[phrase] += 1
    phrases = [PhraseCount(p, c, after[p]) for p, c in counts.items()]
    phrases.sort(key=lambda pc: (-pc.count, pc.phrase))
    return ExternalPhraseReport(
        phrases=phrases,
        questions=Rate(with_ext, total),
        stopword_hash=stopword_hash(stopwords),
        occurrences=sum(counts.values()),
        unique_after_wh=sum(1 for p in after if after[p]),
    )


def what_kind_rate(corpus) -> Rate:
    """Share of questions opening with "what kind" or "what type"."""
    hits = total = 0
    for question, _ in _questions(corpus):
        total += 1
        head = [normalize_token(t) for t in question[:2]]
        if head in (["what", "kind"], ["what", "type"]):
            hits += 1
    return Rate(hits, total)
