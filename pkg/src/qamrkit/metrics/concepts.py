from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..model import GenericGraph, normalize_token
from .prf import PRF

MATCH_MODES = ("surface", "content-overlap")


@dataclass(frozen=True)
class NodeMatchConfig:
    """How a predicted node is judged equal to a gold node.

    ``surface`` compares the case-folded rightmost tokens; ``content-overlap``
    accepts any shared token and ranks pairs by token-set Jaccard.
    ``lemma_table`` maps case-folded surface forms to lemmas on both sides.
    """

    mode: str = "surface"
    lemma_table: Optional[dict] = None

    def __post_init__(self):
        if self.mode not in MATCH_MODES:
            raise ValueError(f"mode must be one of {MATCH_MODES}")

    def words(self, content: Sequence[str]) -> list:
        out = [normalize_token(t) for t in content]
        if self.lemma_table:
            out = [self.lemma_table.get(w, w) for w in out]
        return out

    def quality(self, a: Sequence[str], b: Sequence[str]) -> float:
        wa, wb = self.words(a), self.words(b)
        if not wa or not wb:
            return 0.0
        if self.mode == "surface":
            return 1.0 if wa[-1] == wb[-1] else 0.0
        sa, sb = set(wa), set(wb)
        return len(sa & sb) / len(sa | sb)


def concept_agreement(gold: GenericGraph, pred, cfg: NodeMatchConfig = NodeMatchConfig(),
                      sentence_tokens: Optional[Sequence[str]] = None) -> PRF:
    """Greedy one-to-one node agreement between a predicted and a gold graph.

    Gold nodes none of whose words occur in the sentence (e.g. inferred entity
    types or normalized predicates) are left out of the gold total and cannot
    be matched. ``pred`` may be a :class:`GenericGraph` or an induced graph;
    for the latter the sentence defaults to its tokens.
    """
    if not isinstance(pred, GenericGraph):
        from ..induce import to_generic
        if sentence_tokens is None:
            sentence_tokens = pred.tokens
        pred = to_generic(pred)
    gold_items = list(gold.nodes.items())
    pred_items = list(pred.nodes.items())
    if sentence_tokens is not None:
        sent_words = set(cfg.words(sentence_tokens))
        gold_items = [(n, c) for n, c in gold_items if sent_words & set(cfg.words(c))]
    pairs = []
    for gi, (_, gc) in enumerate(gold_items):
        for pi, (_, pc) in enumerate(pred_items):
            q = cfg.quality(gc, pc)
            if q > 0:
                pairs.append((-q, gi, pi))
    pairs.sort()
    used_g, used_p = set(), set()
    for _, gi, pi in pairs:
        if gi in used_g or pi in used_p:
            continue
        used_g.add(gi)
        used_p.add(pi)
    return PRF(len(used_g), len(pred_items), len(gold_items))
