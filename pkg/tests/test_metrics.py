import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qamrkit.filtering import to_qamrs
from qamrkit.induce import induce_graph
from qamrkit.metrics.concepts import NodeMatchConfig, concept_agreement
from qamrkit.metrics.prf import PRF
from qamrkit.metrics.qa import answer_em, answer_f1, bleu, multi_bleu, normalize_answer, qg_pr
from qamrkit.metrics.srl import (align_qa, align_sentence, arc_recall, predicate_in_question,
                                 recall_curve, relative_overlap)
from qamrkit.model import AnswerSet, GenericGraph, GoldArc, Qamr, QAPair, Sentence

from _support import VINKEN, load, oracle_bleu, oracle_multi_bleu, random_corpus, rng


def check_prf(p: PRF):
    P, R = p.precision, p.recall
    expected = 0.0 if P + R == 0 else 2 * P * R / (P + R)
    assert abs(p.f1 - expected) <= 1e-12


# -- PRF --------------------------------------------------------------------

def test_prf_conventions():
    assert PRF(0, 0, 0).precision == 1.0 and PRF(0, 0, 3).recall == 0.0
    assert PRF(0, 0, 3).f1 == 0.0
    with pytest.raises(ValueError):
        PRF(3, 2, 5)
    total = PRF(1, 2, 3) + PRF(1, 1, 1)
    assert (total.matched, total.predicted_total, total.gold_total) == (2, 3, 4)


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_prf_algebra(m, p, g):
    m = min(m, p, g)
    check_prf(PRF(m, p, g))


# -- concept agreement ------------------------------------------------------

def _g(*contents):
    g = GenericGraph()
    for i, c in enumerate(contents):
        g.add_node(f"n{i}", tuple(c.split()))
    return g


def test_concepts_identical():
    g = _g("join", "board", "Pierre")
    prf = concept_agreement(g, g)
    assert prf.f1 == 1.0


def test_concepts_partial():
    gold = _g("join", "board", "Pierre", "old")
    pred = _g("join", "board")
    prf = concept_agreement(gold, pred)
    assert (prf.precision, prf.recall) == (1.0, 0.5)
    assert abs(prf.f1 - 2 / 3) < 1e-12


def test_concepts_modes_and_sentence_filter():
    gold, pred = _g("the board"), _g("board members")
    assert concept_agreement(gold, pred).matched == 0
    assert concept_agreement(gold, pred, NodeMatchConfig("content-overlap")).matched == 1
    lemmas = {"joined": "join"}
    assert concept_agreement(_g("join"), _g("joined"), NodeMatchConfig("surface", lemmas)).matched == 1
    # gold concepts not anchored in the sentence are skipped
    prf = concept_agreement(_g("join", "person"), _g("join"), sentence_tokens=("Pierre", "will", "join"))
    assert (prf.matched, prf.gold_total) == (1, 1)


def test_concepts_accept_induced_graph():
    c = load(VINKEN)
    g = induce_graph(c.sentences["PTB_train_0"], to_qamrs(c)["PTB_train_0"])
    gold = _g("Pierre", "Vinken", "61 years", "old", "join", "the board", "nonexecutive",
              "director", "Nov. 29")
    assert concept_agreement(gold, g).f1 == 1.0


# -- SRL alignment ----------------------------------------------------------

TOKENS = ("Pierre", "will", "join", "the", "board", "soon")


def test_relative_overlap():
    assert relative_overlap({1, 2, 3}, {2, 3, 4}) == Fraction(1, 2)
    assert relative_overlap({1, 2}, {1, 2}) == 1
    assert relative_overlap({1, 2}, {2, 3, 4, 5}, mode="intersection-over-answer") == Fraction(1, 2)


def test_align_requires_predicate_in_question():
    arc = GoldArc(2, AnswerSet([3, 4]), "A1", "propbank")
    hit = QAPair(("What", "will", "Pierre", "join", "?"), AnswerSet([3, 4]), "s")
    miss = QAPair(("What", "is", "there", "?"), AnswerSet([3, 4]), "s")
    a = align_qa(hit, [arc], TOKENS)
    assert a.arc == 0 and a.overlap == 1
    assert align_qa(miss, [arc], TOKENS).arc is None
    assert not predicate_in_question(arc, miss.question, TOKENS)
    lemma = {"joining": "join", "join": "join"}
    ing = QAPair(("Who", "is", "joining", "?"), AnswerSet([0]), "s")
    arc0 = GoldArc(2, AnswerSet([0]), "A0", "propbank")
    assert align_qa(ing, [arc0], TOKENS).arc is None
    assert align_qa(ing, [arc0], TOKENS, lemma_table=lemma).arc == 0


def test_align_ties_go_to_first_arc():
    arcs = [GoldArc(2, AnswerSet([3]), "A1", "propbank"), GoldArc(2, AnswerSet([4]), "A2", "propbank")]
    qa = QAPair(("What", "join", "?"), AnswerSet([3, 4]), "s")
    assert align_qa(qa, arcs, TOKENS).arc == 0


def test_arc_recall_edges():
    sent = Sentence("s", TOKENS)
    arcs = {"s": [GoldArc(2, AnswerSet([3, 4]), "A1", "propbank"),
                  GoldArc(2, AnswerSet([0]), "A0", "propbank")]}
    full = Qamr("s", (QAPair(("What", "join", "?"), AnswerSet([3, 4]), "s"),
                      QAPair(("Who", "join", "?"), AnswerSet([0]), "s")))
    assert arc_recall({"s": sent}, {"s": full}, arcs).value == 1.0
    assert arc_recall({"s": sent}, {"s": Qamr("s", ())}, arcs).value == 0.0
    for al in align_sentence(sent, full, arcs["s"]):
        assert predicate_in_question(arcs["s"][al.arc], full.pairs[0].question, TOKENS)


def _subset_oracle(corpus, arcs, n):
    """Average arc recall over the product of every group's n-subsets of annotators."""
    groups = {}
    for a in corpus.annotations:
        groups.setdefault((a.sentence_id, a.group_key), set()).add(a.worker_id)
    keys = sorted(groups)
    choices = [list(itertools.combinations(sorted(groups[k]), min(n, len(groups[k])))) for k in keys]
    total, count = 0.0, 0
    for combo in itertools.product(*choices):
        keep = {(k[0], k[1], w) for k, ws in zip(keys, combo) for w in ws}
        sub = type(corpus)(corpus.sentences, [a for a in corpus.annotations
                                              if (a.sentence_id, a.group_key, a.worker_id) in keep])
        total += arc_recall(sub.sentences, to_qamrs(sub), arcs).value
        count += 1
    return total / count


def test_recall_curve_matches_product_space_oracle():
    r = rng(11)
    for _ in range(5):
        corpus, arcs = random_corpus(r, sentences=1, groups=2, annotators=3, words=6)
        curve = recall_curve(corpus, arcs, ns=(1, 2, 3), annotators=3)
        for n in (1, 2, 3):
            assert abs(curve[n] - _subset_oracle(corpus, arcs, n)) < 1e-12


def test_recall_curve_monotone_and_full_at_five():
    r = rng(12)
    for _ in range(20):
        corpus, arcs = random_corpus(r)
        curve = recall_curve(corpus, arcs)
        vals = [curve[n] for n in range(1, 6)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
        assert curve[5] == arc_recall(corpus.sentences, to_qamrs(corpus), arcs).value


def test_recall_curve_single_covering_annotator():
    corpus, arcs = random_corpus(rng(13), sentences=1, groups=1, annotators=5, qas=0)
    arc = arcs["s0"][0]
    tok = corpus.sentences["s0"].tokens[arc.predicate_index]
    from qamrkit.model import Judgment, RawAnnotation, Verdict
    corpus.annotations = [RawAnnotation("s0", f"w{i}", 0, ("what", tok, "?"),
                                        arc.argument, (Judgment("v", Verdict.ANSWER, arc.argument),),
                                        group="0") for i in range(5)]
    corpus.annotations[1:] = [RawAnnotation("s0", f"w{i}", 0, ("what", "zzz", "?"), AnswerSet([0]),
                                            group="0") for i in range(1, 5)]
    arcs = {"s0": [arc]}
    curve = recall_curve(corpus, arcs)
    assert abs(curve[1] - 1 / 5) < 1e-12 and curve[5] == 1.0


def test_recall_curve_sampled_is_seeded():
    corpus, arcs = random_corpus(rng(14))
    a = recall_curve(corpus, arcs, mode="sampled", seed=3, trials=20)
    assert a == recall_curve(corpus, arcs, mode="sampled", seed=3, trials=20)
    assert a[5] == recall_curve(corpus, arcs)[5]
    with pytest.raises(ValueError):
        recall_curve(corpus, arcs, ns=(6,))


# -- QA / QG ----------------------------------------------------------------

def test_answer_metrics_examples():
    assert (answer_em("Pierre Vinken", ["Pierre Vinken"]), answer_f1("Pierre Vinken", ["Pierre Vinken"])) == (1, 1.0)
    assert answer_em("Vinken", ["Pierre Vinken"]) == 0
    assert abs(answer_f1("Vinken", ["Pierre Vinken"]) - 2 / 3) < 1e-12
    assert (answer_em("", ["x"]), answer_f1("", ["x"])) == (0, 0.0)
    assert normalize_answer("The  Board!") == "board"


def test_f1_dominates_em_on_random_strings():
    r = random.Random(15)
    words = ["the", "a", "board", "join", "Pierre", "61", "old", ",", "an"]
    for _ in range(10_000):
        p = " ".join(r.choices(words, k=r.randint(0, 4)))
        g = " ".join(r.choices(words, k=r.randint(0, 4)))
        assert answer_f1(p, [g]) >= answer_em(p, [g])


def test_multi_bleu_examples():
    x = "what will he join the board".split()
    assert multi_bleu(x, x) == 1.0
    assert multi_bleu(["who", "is", "it"], ["what", "was", "that"]) == 0.0
    # frozen from the brute-force n-gram oracle
    assert multi_bleu("what will he join".split(), x) == pytest.approx(0.6065306597126334, abs=1e-15)
    assert oracle_multi_bleu("what will he join".split(), x) == pytest.approx(math.exp(-0.5))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from("a b c d e".split()), max_size=8),
       st.lists(st.sampled_from("a b c d e".split()), max_size=8))
def test_bleu_matches_oracle(cand, ref):
    for n in range(1, 5):
        assert bleu(cand, ref, n) == pytest.approx(oracle_bleu(cand, ref, n), abs=1e-12)
    if len(cand) >= 4:
        assert multi_bleu(cand, cand) == pytest.approx(1.0)


def test_qg_pr():
    gold = [q.split() for q in ["who will join ?", "what will he join ?"]]
    assert qg_pr(gold, gold).f1 == 1.0
    none = qg_pr([], gold)
    assert (none.precision, none.recall) == (1.0, 0.0)
    fuzzy = qg_pr(["what will he join the board ?".split()], gold, threshold=0.5)
    assert fuzzy.matched == 1
    exact = qg_pr(["What will he join ?".split()], gold, threshold=1.0)
    assert exact.matched == 1
    check_prf(fuzzy)
