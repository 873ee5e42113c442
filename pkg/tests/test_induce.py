import time
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qamrkit.filtering import to_qamrs
from qamrkit.induce import (EMPTY, NoAnswerNode, NoQuestionNode, Occurrence, extract_pa,
                            find_occurrences, identify_nodes, induce_graph, render_tree,
                            score_nodes, to_generic)
from qamrkit.model import AnswerSet, Qamr, QAPair, Sentence, Span, normalize_token

from _support import VINKEN, WORKED, load

VINKEN_GRAPH_NODES = ["Pierre", "Vinken", "61 years", "old", "join", "the board", "nonexecutive",
              "director", "Nov. 29"]
VINKEN_GRAPH_EDGES = {
    ("join", "Pierre"), ("Pierre", "Vinken"), ("old", "Pierre"), ("old", "61 years"),
    ("join", "the board"), ("join", "director"), ("director", "nonexecutive"), ("join", "Nov. 29"),
}


@pytest.fixture(scope="module")
def vinken():
    c = load(VINKEN)
    sent = c.sentences["PTB_train_0"]
    return sent, to_qamrs(c)["PTB_train_0"]


def _by_text(graph):
    return {graph.node_text(n): n for n in graph.nodes}


def test_vinken_graph_graph(vinken):
    sent, qamr = vinken
    t0 = time.perf_counter()
    g = induce_graph(sent, qamr)
    assert time.perf_counter() - t0 < 1.0
    assert [g.node_text(n) for n in g.nodes] == VINKEN_GRAPH_NODES
    labeled = {(g.node_text(e.src), g.node_text(e.tgt)) for e in g.edges if e.label != EMPTY}
    assert labeled == VINKEN_GRAPH_EDGES
    assert g.node_text(g.root) == "join"
    # every labeled edge is the question of the pair that produced it
    for e in g.labeled_edges():
        assert e.label == qamr.pairs[e.pair_index].question_text


def test_vinken_graph_node_scores(vinken):
    sent, qamr = vinken
    g = induce_graph(sent, qamr)
    by = _by_text(g)
    counts = {t: (g.stats[by[t]].c_q, g.stats[by[t]].c_a) for t in VINKEN_GRAPH_NODES}
    # frozen from a brute-force scan of the eight questions and answers
    assert counts == {
        "Pierre": (2, 2), "Vinken": (3, 3), "61 years": (1, 1), "old": (2, 1), "join": (4, 0),
        "the board": (2, 1), "nonexecutive": (1, 2), "director": (2, 1), "Nov. 29": (0, 1),
    }
    assert g.stats[by["join"]].score == 1
    assert g.stats[by["old"]].score == Fraction(2, 3)
    assert g.stats[by["Nov. 29"]].score == 0


def test_find_occurrences_examples(vinken):
    sent, qamr = vinken
    q = Qamr(sent.id, (QAPair(tuple("Who is 61 years old ?".split()), AnswerSet([0, 1]), sent.id),))
    occ = find_occurrences(sent, q)
    assert [o.span for o in occ if o.in_question] == [Span(3, 6)]
    q = Qamr(sent.id, (QAPair(("What", "will", "he", "join", "?"), AnswerSet([9, 10]), sent.id),))
    assert [o.span for o in find_occurrences(sent, q) if not o.in_question] == [Span(9, 11)]
    q = Qamr(sent.id, (QAPair(("Why", "cats", "?"), AnswerSet([0]), sent.id),))
    assert [o for o in find_occurrences(sent, q) if o.in_question] == []


def test_identify_nodes_examples():
    assert identify_nodes([Occurrence(Span(0, 2), False, 0)]) == [Span(0, 2)]
    occ = [Occurrence(Span(8, 11), True, 0), Occurrence(Span(9, 11), False, 1),
           Occurrence(Span(8, 9), True, 1)]
    assert identify_nodes(occ) == [Span(8, 9), Span(9, 11)]


def test_worked_example():
    c = load(WORKED)
    g = induce_graph(c.sentences["PTB_train_0"], to_qamrs(c)["PTB_train_0"])
    assert {g.node_text(n) for n in g.nodes} == {"join", "Pierre", "the board"}
    assert {(g.node_text(e.src), g.node_text(e.tgt)) for e in g.edges} == \
        {("join", "Pierre"), ("join", "the board")}


def test_minimal_instance(vinken):
    sent, _ = vinken
    q = Qamr(sent.id, (QAPair(("What", "will", "he", "join", "?"), AnswerSet([9, 10]), sent.id),))
    g = induce_graph(sent, q)
    assert [g.node_text(n) for n in g.nodes] == ["join", "the board"]
    assert [(g.node_text(e.src), g.node_text(e.tgt)) for e in g.edges] == [("join", "the board")]
    assert g.node_text(g.root) == "join"


@pytest.mark.parametrize("question, answer, pred, head", [
    ("How old is Pierre Vinken ?", [3, 4, 5], "old", "61 years"),
    ("What is Pierre 's last name ?", [1], "Pierre", "Vinken"),
    ("Who is 61 years old ?", [0, 1], "old", "Pierre"),
])
def test_extract_pa_examples(vinken, question, answer, pred, head):
    sent, qamr = vinken
    k = next(i for i, p in enumerate(qamr.pairs) if p.question_text == question)
    assert qamr.pairs[k].answer == AnswerSet(answer)
    occ = find_occurrences(sent, qamr)
    nodes = identify_nodes(occ, sent.tokens)
    pa = extract_pa(k, occ, nodes, score_nodes(nodes, occ))
    assert Span.text(pa.predicate, sent.tokens) == pred
    assert Span.text(pa.answer_head, sent.tokens) == head


def test_extract_pa_errors():
    occ = [Occurrence(Span(0, 1), False, 0)]
    with pytest.raises(NoQuestionNode):
        extract_pa(0, occ, [Span(0, 1)], score_nodes([Span(0, 1)], occ))
    occ = [Occurrence(Span(0, 1), True, 0), Occurrence(Span(0, 1), False, 0)]
    with pytest.raises(NoAnswerNode) as err:
        extract_pa(0, occ, [Span(0, 1)], score_nodes([Span(0, 1)], occ))
    assert err.value.pa.predicate == Span(0, 1)


def test_cycle_is_rejected():
    sent = Sentence("s", ("alpha", "beta"))
    q = Qamr("s", (QAPair(("what", "alpha", "?"), AnswerSet([1]), "s"),
                   QAPair(("what", "beta", "?"), AnswerSet([0]), "s")))
    g = induce_graph(sent, q)
    # equal scores: the leftmost predicate attaches first, the reverse edge would close a cycle
    assert [(e.src, e.tgt) for e in g.edges] == [(Span(0, 1), Span(1, 2))]
    assert any("cycle" in d for d in g.diagnostics)


def test_empty_qamr():
    g = induce_graph(Sentence("s", ("a",)), Qamr("s", ()))
    assert g.nodes == () and g.edges == () and g.root is None


def test_render_and_generic(vinken):
    g = induce_graph(*vinken)
    text = render_tree(g)
    assert text.splitlines()[0].startswith("join <8-9>")
    gen = to_generic(g)
    assert gen.root == "8-9" and gen.nodes["9-11"] == ("the", "board")


# -- property tests ---------------------------------------------------------

def boundary_partition(spans):
    """Oracle: cut the occurrence spans at every occurrence boundary."""
    points = sorted({p for s in spans for p in (s.start, s.end)})
    return sorted(Span(a, b) for a, b in zip(points, points[1:])
                  if any(s.start <= a and b <= s.end for s in spans))


span_st = st.integers(0, 11).flatmap(lambda a: st.integers(a + 1, 12).map(lambda b: Span(a, b)))


@settings(max_examples=300, deadline=None)
@given(st.lists(span_st, min_size=1, max_size=8))
def test_identify_nodes_matches_partition_oracle(spans):
    occ = [Occurrence(s, i % 2 == 0, i) for i, s in enumerate(spans)]
    nodes = identify_nodes(occ)
    assert nodes == boundary_partition(spans)
    # fixpoint: minimal nodes split no further
    assert identify_nodes([Occurrence(n, True, 0) for n in nodes]) == nodes


@settings(max_examples=200, deadline=None)
@given(st.lists(span_st, min_size=1, max_size=8))
def test_score_nodes_brute_force_counts(spans):
    occ = [Occurrence(s, i % 3 != 0, i) for i, s in enumerate(spans)]
    nodes = identify_nodes(occ)
    stats = score_nodes(nodes, occ)
    for n in nodes:
        inside = [o for o in occ if set(n.indices()) <= set(o.span.indices())]
        assert stats[n].c_q == sum(o.in_question for o in inside)
        assert stats[n].c_a == sum(not o.in_question for o in inside)
        assert stats[n].c_q + stats[n].c_a == len(inside) >= 1


VOCAB = ["alpha", "beta", "gamma", "delta", "the", "of", ","]


@st.composite
def qamr_inputs(draw):
    n = draw(st.integers(3, 9))
    tokens = tuple(draw(st.lists(st.sampled_from(VOCAB), min_size=n, max_size=n)))
    sent = Sentence("s", tokens)
    pairs = []
    for _ in range(draw(st.integers(1, 6))):
        body = draw(st.lists(st.sampled_from(tokens + ("is", "zeta")), min_size=1, max_size=4))
        ans = draw(st.frozensets(st.integers(0, n - 1), min_size=1, max_size=3))
        pairs.append(QAPair(("what",) + tuple(body) + ("?",), AnswerSet(ans), "s"))
    return sent, Qamr("s", tuple(pairs))


def _crosses(e1, e2):
    a, b = sorted((e1.src.start, e1.tgt.start))
    c, d = sorted((e2.src.start, e2.tgt.start))
    return a < c < b < d or c < a < d < b


@settings(max_examples=300, deadline=None)
@given(qamr_inputs(), st.sampled_from(["deferred", "per-class"]))
def test_graph_invariants(inputs, order):
    sent, qamr = inputs
    g = induce_graph(sent, qamr, empty_edge_order=order)
    nodes = list(g.nodes)
    for x, a in enumerate(nodes):
        for b in nodes[x + 1:]:
            assert not a.intersects(b)
    node_set = set(nodes)
    pairs = [(e.src, e.tgt) for e in g.edges]
    assert len(pairs) == len(set(pairs))
    for e in g.edges:
        assert e.src in node_set and e.tgt in node_set and e.src != e.tgt
    for i, e1 in enumerate(g.edges):
        for e2 in g.edges[i + 1:]:
            assert not _crosses(e1, e2)
    # acyclic: repeatedly strip nodes without incoming edges
    remaining, edges = set(nodes), set(pairs)
    while remaining:
        free = {n for n in remaining if not any(t == n for _, t in edges)}
        assert free, "cycle"
        remaining -= free
        edges = {(s, t) for s, t in edges if s not in free}
    questions = {p.question_text for p in qamr.pairs}
    for e in g.labeled_edges():
        assert e.label in questions
        q = [normalize_token(t) for t in qamr.pairs[e.pair_index].question]
        src = [normalize_token(t) for t in sent.tokens[e.src.start:e.src.end]]
        assert any(q[i:i + len(src)] == src for i in range(len(q)))
    # determinism
    assert induce_graph(sent, qamr, empty_edge_order=order) == g
