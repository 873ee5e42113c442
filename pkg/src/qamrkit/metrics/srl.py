"""Alignment of QA pairs to gold predicate-argument arcs and coverage recall."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from ..model import GoldArc, QAPair, normalize_token

log = logging.getLogger(__name__)

OVERLAP_MODES = ("jaccard", "intersection-over-answer")
PREDICATE_MODES = ("question", "pa")


@dataclass(frozen=True)
class Alignment:
    arc: Optional[int]
    overlap: Fraction = Fraction(0)

    @property
    def aligned(self) -> bool:
        return self.arc is not None


def relative_overlap(answer, argument, mode: str = "jaccard") -> Fraction:
    a, g = set(answer), set(argument)
    inter = len(a & g)
    if mode == "jaccard":
        return Fraction(inter, len(a | g)) if a | g else Fraction(0)
    if mode == "intersection-over-answer":
        return Fraction(inter, len(a)) if a else Fraction(0)
    raise ValueError(f"unknown overlap mode {mode!r}")


def predicate_in_question(arc: GoldArc, question: Sequence[str], tokens: Sequence[str],
                          lemma_table: Optional[dict] = None) -> bool:
    def norm(t):
        w = normalize_token(t)
        return lemma_table.get(w, w) if lemma_table else w

    return norm(tokens[arc.predicate_index]) in {norm(t) for t in question}


def align_qa(pair: QAPair, arcs: Sequence[GoldArc], tokens: Sequence[str], *,
             pa=None, lemma_table: Optional[dict] = None, overlap: str = "jaccard",
             predicate_mode: str = "question") -> Alignment:
    """Align one QA pair to the arc with the highest answer/argument overlap.

    Only arcs whose predicate word occurs in the question are candidates. In
    ``pa`` mode the arc predicate must also fall inside the pair's extracted
    predicate node ``pa.predicate``. Ties go to the earliest arc.
    """
    if predicate_mode not in PREDICATE_MODES:
        raise ValueError(f"predicate_mode must be one of {PREDICATE_MODES}")
    best, best_score = None, Fraction(0)
    for k, arc in enumerate(arcs):
        if not predicate_in_question(arc, pair.question, tokens, lemma_table):
            continue
        if predicate_mode == "pa" and (pa is None or arc.predicate_index not in pa.predicate):
            continue
        score = relative_overlap(pair.answer, arc.argument, overlap)
        if score > best_score:
            best, best_score = k, score
    return Alignment(best, best_score)


def align_sentence(sentence, qamr, arcs: Sequence[GoldArc], **kw) -> list:
    """Alignments for every pair of a QAMR, with predicates from induction steps 1-2."""
    pas = [None] * len(qamr.pairs)
    if kw.get("predicate_mode") == "pa":
        from ..induce import NoAnswerNode, NoQuestionNode, extract_pa, find_occurrences, \
            identify_nodes, score_nodes
        occ = find_occurrences(sentence, qamr)
        nodes = identify_nodes(occ, sentence.tokens)
        stats = score_nodes(nodes, occ)
        for k in range(len(qamr.pairs)):
            try:
                pas[k] = extract_pa(k, occ, nodes, stats)
            except NoAnswerNode as e:
                pas[k] = e.pa
            except NoQuestionNode:
                pass
    return [align_qa(p, arcs, sentence.tokens, pa=pas[k], **kw) for k, p in enumerate(qamr.pairs)]


@dataclass(frozen=True)
class Recall:
    covered: int
    total: int

    @property
    def value(self) -> float:
        return self.covered / self.total if self.total else 1.0


def arc_recall(sentences: dict, qamrs: dict, arcs: dict, **kw) -> Recall:
    """Fraction of gold arcs aligned to by at least one QA pair."""
    covered = total = 0
    for sid, sent_arcs in arcs.items():
        total += len(sent_arcs)
        qamr = qamrs.get(sid)
        if qamr is None or not qamr.pairs:
            continue
        hit = {a.arc for a in align_sentence(sentences[sid], qamr, sent_arcs, **kw) if a.aligned}
        covered += len(hit)
    return Recall(covered, total)


def _coverage_table(corpus, arcs: dict, **kw):
    """Per (sentence, group): sorted annotators and the arcs each one covers."""
    from ..filtering import to_qamrs

    qamrs = to_qamrs(corpus)
    by_sentence = corpus.annotations_by_sentence()
    groups = {}
    for sid, anns in by_sentence.items():
        sent_arcs = arcs.get(sid, [])
        alignments = align_sentence(corpus.sentences[sid], qamrs[sid], sent_arcs, **kw) \
            if sent_arcs and anns else [Alignment(None)] * len(anns)
        for ann, al in zip(anns, alignments):
            cover = groups.setdefault((sid, ann.group_key), {}).setdefault(ann.worker_id, set())
            if al.aligned:
                cover.add(al.arc)
    return {key: dict(sorted(workers.items())) for key, workers in groups.items()}


def recall_curve(corpus, arcs: dict, ns: Sequence[int] = (1, 2, 3, 4, 5), *,
                 mode: str = "exhaustive", seed: int = 0, trials: int = 100,
                 annotators: int = 5, **kw) -> dict:
    """Expected arc recall when keeping ``n`` annotators per target-word group.

    ``exhaustive`` gives the exact mean over every choice of ``n`` annotators
    in every group, computed per arc as one minus the chance that no chosen
    annotator in any group of its sentence covers it. ``sampled`` averages
    ``trials`` random draws, trial ``t`` seeded with ``seed + t``. Groups with
    fewer than ``annotators`` workers keep all of them once ``n`` exceeds
    their size.
    """
    for n in ns:
        if not 1 <= n <= annotators:
            raise ValueError(f"n={n} outside 1..{annotators}")
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    table = _coverage_table(corpus, arcs, **kw)
    short = [key for key, workers in table.items() if len(workers) < annotators]
    if short:
        log.warning("%d groups have fewer than %d annotators", len(short), annotators)
    by_sent = {}
    for (sid, _), workers in sorted(table.items()):
        by_sent.setdefault(sid, []).append(list(workers.values()))
    total = sum(len(a) for a in arcs.values())
    result = {}
    for n in ns:
        if not total:
            result[n] = 1.0
            continue
        if mode == "exhaustive":
            acc = Fraction(0)
            for sid, sent_arcs in arcs.items():
                groups = by_sent.get(sid, [])
                for k in range(len(sent_arcs)):
                    miss = Fraction(1)
                    for covers in groups:
                        size = len(covers)
                        m = sum(1 for c in covers if k in c)
                        take = min(n, size)
                        miss *= Fraction(comb(size - m, take), comb(size, take))
                    acc += 1 - miss
            result[n] = float(acc / total)
        else:
            acc = 0
            for t in range(trials):
                rng = random.Random(seed + t)
                covered = 0
                for sid, sent_arcs in arcs.items():
                    hit = set()
                    for covers in by_sent.get(sid, []):
                        for c in rng.sample(covers, min(n, len(covers))):
                            hit |= c
                    covered += len(hit)
                acc += covered
            result[n] = float(Fraction(acc, total * trials))
    return result
