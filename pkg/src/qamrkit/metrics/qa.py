"""Question answering and question generation scorers."""

from __future__ import annotations

import math
import re
import string
from collections import Counter
from typing import Iterable, Sequence, Union

from ..model import normalize_token
from .prf import PRF

Text = Union[str, Sequence[str]]

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT = set(string.punctuation)


def normalize_answer(text: Text) -> str:
    """SQuAD normalization: lowercase, drop punctuation and a/an/the, squeeze spaces."""
    if not isinstance(text, str):
        text = " ".join(text)
    text = text.lower()
    text = "".join(ch for ch in text if ch not in _PUNCT)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def _em(pred: Text, gold: Text) -> int:
    return int(normalize_answer(pred) == normalize_answer(gold))


def _f1(pred: Text, gold: Text) -> float:
    p = normalize_answer(pred).split()
    g = normalize_answer(gold).split()
    if not p or not g:
        # both empty counts as agreement, as in the reference scorer
        return float(p == g)
    common = Counter(p) & Counter(g)
    same = sum(common.values())
    if same == 0:
        return 0.0
    precision = same / len(p)
    recall = same / len(g)
    return 2 * precision * recall / (precision + recall)


def answer_em(pred: Text, golds: Iterable[Text]) -> int:
    return max((_em(pred, g) for g in golds), default=0)


def answer_f1(pred: Text, golds: Iterable[Text]) -> float:
    return max((_f1(pred, g) for g in golds), default=0.0)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: Sequence[str], reference: Sequence[str], max_order: int) -> float:
    """Cumulative sentence BLEU up to ``max_order`` with a single reference.

    An order with no candidate n-grams, or none matched, makes the score 0.
    """
    cand = [normalize_token(t) for t in candidate]
    ref = [normalize_token(t) for t in reference]
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_order + 1):
        c = _ngrams(cand, n)
        total = sum(c.values())
        clipped = sum((c & _ngrams(ref, n)).values())
        if total == 0 or clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    bp = 1.0 if len(cand) > len(ref) else math.exp(1 - len(ref) / len(cand))
    return bp * math.exp(log_sum / max_order)


def multi_bleu(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Mean of BLEU-1 through BLEU-4."""
    return sum(bleu(candidate, reference, n) for n in range(1, 5)) / 4


def _same(a: Sequence[str], b: Sequence[str]) -> bool:
    return [normalize_token(t) for t in a] == [normalize_token(t) for t in b]


def qg_pr(predicted: Sequence[Sequence[str]], gold: Sequence[Sequence[str]],
          threshold: float = 0.8) -> PRF:
    """Greedy one-to-one matching of generated to gold questions.

    A pair matches when multi-BLEU exceeds ``threshold``; a threshold of 1.0
    or more switches to exact (case-folded) token equality. Each predicted
    question takes its best-scoring unmatched gold question.
    """
    exact = threshold >= 1.0
    used = set()
    matched = 0
    for p in predicted:
        best, best_score = None, None
        for k, g in enumerate(gold):
            if k in used:
                continue
            if exact:
                if _same(p, g):
                    best = k
                    break
                continue
            s = multi_bleu(p, g)
            if s > threshold and (best_score is None or s > best_score):
                best, best_score = k, s
        if best is not None:
            used.add(best)
            matched += 1
    return PRF(matched, len(predicted), len(gold))
