"""Deterministic conversion of a QAMR into a QAMR graph.

The pipeline has three stages:

1. :func:`find_occurrences` locates every contiguous sentence span that
   appears in a question or an answer, and :func:`identify_nodes` splits
   those spans until no node contains a sub-span that occurs on its own.
2. :func:`score_nodes` gives each node the fraction of its occurrences that
   fall in questions; :func:`extract_pa` picks the best-scoring question node
   of every pair as its predicate and the best answer node as the argument.
3. :func:`induce_graph` attaches arguments to predicates in decreasing score
   order, rejecting duplicate, cyclic and crossing edges.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .model import GenericGraph, Qamr, Sentence, Span, contiguous_runs, normalize_token
from .text import is_punct, load_stopwords

EMPTY = ""
EMPTY_ORDERS = ("deferred", "per-class")


class NoQuestionNode(Exception):
    """The question of a pair contains no graph node."""


class NoAnswerNode(Exception):
    """The answer of a pair contains no node other than the predicate.

    ``pa`` holds the partial structure so its question arguments can still be
    attached with empty labels.
    """

    def __init__(self, message, pa):
        super().__init__(message)
        self.pa = pa


@dataclass(frozen=True)
class Occurrence:
    span: Span
    in_question: bool
    pair_index: int


@dataclass(frozen=True)
class NodeStats:
    span: Span
    c_q: int
    c_a: int

    @property
    def score(self) -> Fraction:
        return Fraction(self.c_q, self.c_q + self.c_a)


@dataclass(frozen=True)
class PAStructure:
    pair_index: int
    predicate: Span
    answer_head: Optional[Span]
    question_args: tuple = ()


@dataclass(frozen=True)
class Edge:
    src: Span
    tgt: Span
    label: str
    pair_index: int

    @property
    def is_empty(self) -> bool:
        return self.label == EMPTY


@dataclass
class QamrGraph:
    sentence_id: str
    tokens: tuple
    nodes: tuple = ()
    edges: tuple = ()
    root: Optional[Span] = None
    stats: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def labeled_edges(self) -> list:
        return [e for e in self.edges if not e.is_empty]

    def node_text(self, span: Span) -> str:
        return span.text(self.tokens)


# -- step 1 -----------------------------------------------------------------

def _content(tokens, start, end, stopwords) -> bool:
    return any(not is_punct(t) and normalize_token(t) not in stopwords
               for t in tokens[start:end])


def _trim(norm_sent, span: Span, stopwords) -> Optional[Span]:
    start, end = span.start, span.end

    def drop(i):
        return is_punct(norm_sent[i]) or norm_sent[i] in stopwords

    while start < end and drop(start):
        start += 1
    while end > start and drop(end - 1):
        end -= 1
    return Span(start, end) if start < end else None


def find_occurrences(sentence: Sentence, qamr: Qamr, stopwords=None) -> list:
    """Spans of the sentence occurring contiguously in each question or answer.

    Answers contribute their contiguous runs. Questions are scanned left to
    right for the longest run of tokens that also occurs contiguously in the
    sentence; among equally long sentence positions the one overlapping some
    answer of the QAMR wins, otherwise the leftmost. Matched runs are trimmed
    of stopwords and punctuation at both ends, and runs with nothing left are
    discarded.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    norm_sent = [normalize_token(t) for t in sentence.tokens]
    n = len(norm_sent)
    answer_occ = []
    for k, pair in enumerate(qamr.pairs):
        for run in contiguous_runs(pair.answer):
            answer_occ.append(Occurrence(run, False, k))
    answer_spans = [o.span for o in answer_occ]

    out = []
    for k, pair in enumerate(qamr.pairs):
        q = [normalize_token(t) for t in pair.question]
        i = 0
        while i < len(q):
            best_len, starts = 0, []
            for s in range(n):
                length = 0
                while (i + length < len(q) and s + length < n
                       and norm_sent[s + length] == q[i + length]):
                    length += 1
                if length > best_len:
                    best_len, starts = length, [s]
                elif length == best_len and length > 0:
                    starts.append(s)
            if best_len == 0:
                i += 1
                continue
            chosen = starts[0]
            for s in starts:
                cand = Span(s, s + best_len)
                if any(cand.intersects(a) for a in answer_spans):
                    chosen = s
                    break
            trimmed = _trim(norm_sent, Span(chosen, chosen + best_len), stopwords)
            if trimmed is not None:
                out.append(Occurrence(trimmed, True, k))
            i += best_len
        out.extend(o for o in answer_occ if o.pair_index == k)
    return out


def _cut(a: Span, b: Span) -> set:
    points = sorted({a.start, a.end, b.start, b.end})
    pieces = set()
    for lo, hi in zip(points, points[1:]):
        piece = Span(lo, hi)
        if a.contains(piece) or b.contains(piece):
            pieces.add(piece)
    return pieces


def identify_nodes(occurrences: Sequence[Occurrence], tokens: Optional[Sequence[str]] = None,
                   stopwords=None) -> list:
    """Split occurrence spans to a fixpoint of pairwise-disjoint minimal spans.

    Whenever two current spans intersect (containment or partial overlap) both
    are replaced by the pieces obtained by cutting at all their boundaries.
    If ``tokens`` is given, pieces that are not themselves occurrence spans and
    hold only stopwords or punctuation are dropped.
    """
    original = {o.span for o in occurrences}
    spans = set(original)
    while True:
        ordered = sorted(spans)
        clash = None
        for x, a in enumerate(ordered):
            for b in ordered[x + 1:]:
                if b.start >= a.end:
                    break
                clash = (a, b)
                break
            if clash:
                break
        if clash is None:
            break
        a, b = clash
        spans.discard(a)
        spans.discard(b)
        spans |= _cut(a, b)
    if tokens is not None:
        if stopwords is None:
            stopwords = load_stopwords()
        spans = {s for s in spans
                 if s in original or _content(tokens, s.start, s.end, stopwords)}
    return sorted(spans)


# -- step 2 -----------------------------------------------------------------

def score_nodes(nodes: Sequence[Span], occurrences: Sequence[Occurrence]) -> dict:
    """Count, per node, the question and answer occurrences containing it."""
    stats = {}
    for node in nodes:
        c_q = sum(1 for o in occurrences if o.in_question and o.span.contains(node))
        c_a = sum(1 for o in occurrences if not o.in_question and o.span.contains(node))
        stats[node] = NodeStats(node, c_q, c_a)
    return stats


def _rank_key(stats: dict):
    # highest score first, then leftmost, then shortest
    return lambda s: (-stats[s].score, s.start, len(s))


def extract_pa(pair_index: int, occurrences: Sequence[Occurrence], nodes: Sequence[Span],
               stats: dict) -> PAStructure:
    q_spans = [o.span for o in occurrences if o.pair_index == pair_index and o.in_question]
    a_spans = [o.span for o in occurrences if o.pair_index == pair_index and not o.in_question]
    q_nodes = [n for n in nodes if any(s.contains(n) for s in q_spans)]
    a_nodes = [n for n in nodes if any(s.contains(n) for s in a_spans)]
    if not q_nodes:
        raise NoQuestionNode(f"pair {pair_index}: question contains no node")
    key = _rank_key(stats)
    predicate = min(q_nodes, key=key)
    candidates = [n for n in a_nodes if n != predicate]
    head = min(candidates, key=key) if candidates else None
    args = tuple(n for n in q_nodes if n != predicate and n != head)
    pa = PAStructure(pair_index, predicate, head, args)
    if head is None:
        raise NoAnswerNode(f"pair {pair_index}: answer contains no node besides the predicate", pa)
    return pa


# -- step 3 -----------------------------------------------------------------

def _crosses(e1, e2) -> bool:
    a, b = sorted((e1[0].start, e1[1].start))
    c, d = sorted((e2[0].start, e2[1].start))
    return a < c < b < d or c < a < d < b


def _reaches(adj: dict, src: Span, dst: Span) -> bool:
    stack, seen = [src], {src}
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return False


def induce_graph(sentence: Sentence, qamr: Qamr, stopwords=None,
                 empty_edge_order: str = "deferred") -> QamrGraph:
    """Build the QAMR graph of one sentence.

    Labeled edges (predicate to answer head) are attempted in decreasing
    predicate score, ties broken by predicate position and then pair order.
    Empty-labeled edges to other question nodes are then attempted in the same
    order, and only for targets that still have no incoming edge. With
    ``empty_edge_order="per-class"`` empty edges are instead tried right after
    the labeled edges of each score class, without the no-head condition.
    """
    if empty_edge_order not in EMPTY_ORDERS:
        raise ValueError(f"empty_edge_order must be one of {EMPTY_ORDERS}")
    graph = QamrGraph(qamr.sentence_id, tuple(sentence.tokens))
    if not qamr.pairs:
        return graph
    if stopwords is None:
        stopwords = load_stopwords()
    occ = find_occurrences(sentence, qamr, stopwords)
    nodes = identify_nodes(occ, sentence.tokens, stopwords)
    stats = score_nodes(nodes, occ)
    pas = []
    for k in range(len(qamr.pairs)):
        try:
            pas.append(extract_pa(k, occ, nodes, stats))
        except NoQuestionNode as e:
            graph.diagnostics.append(str(e))
        except NoAnswerNode as e:
            graph.diagnostics.append(str(e))
            pas.append(e.pa)

    def order(pa):
        return (-stats[pa.predicate].score, pa.predicate.start, pa.pair_index)

    labeled = [(order(pa), 0, pa.predicate, pa.answer_head, qamr.pairs[pa.pair_index].question_text,
                pa.pair_index) for pa in pas if pa.answer_head is not None]
    empty = [(order(pa), 1, pa.predicate, arg, EMPTY, pa.pair_index)
             for pa in pas for arg in pa.question_args]
    if empty_edge_order == "deferred":
        candidates = sorted(labeled) + sorted(empty)
    else:
        candidates = sorted(labeled + empty, key=lambda c: (c[0][0], c[1], c[0][1:]))

    accepted, pairs, adj, has_head = [], set(), {}, set()
    for _, is_empty, src, tgt, label, k in candidates:
        if src == tgt or (src, tgt) in pairs:
            continue
        if is_empty and empty_edge_order == "deferred" and tgt in has_head:
            continue
        if _reaches(adj, tgt, src):
            graph.diagnostics.append(f"pair {k}: edge {src}->{tgt} rejected (cycle)")
            continue
        if any(_crosses((src, tgt), (e.src, e.tgt)) for e in accepted):
            graph.diagnostics.append(f"pair {k}: edge {src}->{tgt} rejected (crossing)")
            continue
        accepted.append(Edge(src, tgt, label, k))
        pairs.add((src, tgt))
        adj.setdefault(src, []).append(tgt)
        has_head.add(tgt)

    graph.nodes = tuple(nodes)
    graph.edges = tuple(accepted)
    graph.stats = stats
    graph.root = min(nodes, key=_rank_key(stats)) if nodes else None
    return graph


# -- output -----------------------------------------------------------------

def to_generic(graph: QamrGraph) -> GenericGraph:
    g = GenericGraph()
    for span in graph.nodes:
        g.add_node(str(span), graph.tokens[span.start:span.end])
    for e in graph.edges:
        g.add_edge(str(e.src), str(e.tgt), e.label)
    if graph.root is not None:
        g.set_root(str(graph.root))
    return g


def render_tree(graph: QamrGraph) -> str:
    """Indented rendering rooted at the graph root, then any other heads."""
    children = {}
    for e in graph.edges:
        children.setdefault(e.src, []).append(e)
    targets = {e.tgt for e in graph.edges}
    tops = [graph.root] if graph.root is not None else []
    tops += [n for n in graph.nodes if n not in targets and n != graph.root]
    buf = io.StringIO()
    seen = set()

    def walk(node, depth, label):
        prefix = "  " * depth
        text = graph.node_text(node)
        tag = f"  [{label}]" if label is not None else ""
        again = " (see above)" if node in seen else ""
        buf.write(f"{prefix}{text} <{node}>{tag}{again}\n")
        if node in seen:
            return
        seen.add(node)
        for e in children.get(node, ()):
            walk(e.tgt, depth + 1, "EMPTY" if e.is_empty else e.label)

    for i, top in enumerate(tops):
        walk(top, 0, "ROOT" if i == 0 and top == graph.root else None)
    return buf.getvalue()
