"""Unlabeled SMATCH between two node/edge graphs.

Each graph becomes a multiset of triples: one ``instance`` triple per node
(its content key) and one relation triple per edge with the label dropped.
The score is the best triple overlap over one-to-one node mappings.
:func:`unlabeled_smatch` searches with restarted hill climbing using the
compiled kernel when it is importable; :func:`smatch_exact` enumerates every
mapping and is used to check the climber.
"""

from __future__ import annotations

import importlib
import itertools
import math
import os
import random
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from ..model import GenericGraph, normalize_token
from .prf import PRF

CONTENT_MODES = ("surface", "bag")


class SizeError(ValueError):
    pass


def _load_kernel(name: Optional[str] = None):
    if name not in (None, "python", "cython"):
        raise ValueError(f"unknown SMATCH backend {name!r}")
    if name == "python" or (name is None and os.environ.get("QAMRKIT_PURE_PYTHON")):
        return "python", importlib.import_module("qamrkit.metrics._smatch_py")
    try:
        return "cython", importlib.import_module("qamrkit.metrics._smatch_ext")
    except ImportError:
        if name == "cython":
            raise
        return "python", importlib.import_module("qamrkit.metrics._smatch_py")


BACKEND, _kernel = _load_kernel()


def get_kernel(name: Optional[str] = None):
    """Return ``(backend_name, module)``; ``name`` may force ``"python"`` or ``"cython"``."""
    if name is None:
        return BACKEND, _kernel
    return _load_kernel(name)


def content_key(content, mode: str = "surface", lemma_table: Optional[dict] = None):
    """Node identity used by instance triples.

    ``surface`` keys on the rightmost token (a head heuristic), ``bag`` on the
    set of all tokens. Tokens are case folded and optionally lemmatized.
    """
    words = [normalize_token(t) for t in content]
    if lemma_table:
        words = [lemma_table.get(w, w) for w in words]
    if not words:
        return None
    if mode == "surface":
        return words[-1]
    if mode == "bag":
        return frozenset(words)
    raise ValueError(f"unknown content mode {mode!r}")


@dataclass
class SmatchResult:
    prf: PRF
    mapping: dict

    @property
    def f1(self) -> float:
        return self.prf.f1


def _triple_total(graph: GenericGraph, mode, lemma_table, include_instances) -> int:
    return sum(triples(graph, mode, lemma_table, include_instances).values())


class _Problem:
    """Integer encoding of a graph pair for the kernels."""

    def __init__(self, g1, g2, mode, lemma_table, include_instances):
        self.ids1 = list(g1.nodes)
        self.ids2 = list(g2.nodes)
        pos1 = {n: i for i, n in enumerate(self.ids1)}
        pos2 = {n: i for i, n in enumerate(self.ids2)}
        keys1 = [content_key(g1.nodes[n], mode, lemma_table) for n in self.ids1]
        keys2 = [content_key(g2.nodes[n], mode, lemma_table) for n in self.ids2]
        self.keys1, self.keys2 = keys1, keys2
        n1, n2 = len(keys1), len(keys2)
        self.inst = [[int(include_instances and a is not None and a == b) for b in keys2]
                     for a in keys1]
        rel1 = Counter((pos1[s], pos1[t]) for s, t, _ in g1.edges)
        self.rel1 = [[a, b, c] for (a, b), c in sorted(rel1.items())]
        self.r2 = [[0] * n2 for _ in range(n2)]
        for s, t, _ in g2.edges:
            self.r2[pos2[s]][pos2[t]] += 1
        incident = [[] for _ in range(n1)]
        for r, (a, b, _) in enumerate(self.rel1):
            incident[a].append(r)
            if b != a:
                incident[b].append(r)
        self.inc_ptr = [0]
        self.inc_idx = []
        for lst in incident:
            self.inc_idx.extend(lst)
            self.inc_ptr.append(len(self.inc_idx))

    def greedy_mapping(self) -> list:
        used = set()
        mapping = []
        for a in self.keys1:
            j = next((j for j, b in enumerate(self.keys2)
                      if j not in used and a is not None and a == b), -1)
            if j >= 0:
                used.add(j)
            mapping.append(j)
        return mapping

    def random_mapping(self, rng: random.Random) -> list:
        n1, n2 = len(self.keys1), len(self.keys2)
        targets = list(range(n2))
        rng.shuffle(targets)
        return [targets[i] if i < n2 else -1 for i in range(n1)]


def unlabeled_smatch(g1: GenericGraph, g2: GenericGraph, restarts: int = 4, seed: int = 0,
                     mode: str = "surface", lemma_table: Optional[dict] = None,
                     include_instances: bool = True, node_budget: int = 200,
                     backend: Optional[str] = None) -> SmatchResult:
    """Hill-climbing SMATCH of ``g1`` (predicted) against ``g2`` (gold).

    Restart 0 starts from a greedy content match; restart ``i > 0`` from a
    random mapping seeded with ``seed + i``. The best restart wins; ties keep
    the earliest.
    """
    if max(len(g1.nodes), len(g2.nodes)) > node_budget:
        raise SizeError(f"graph exceeds node budget of {node_budget}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    _, kernel = get_kernel(backend)
    prob = _Problem(g1, g2, mode, lemma_table, include_instances)
    best_score, best_map = -1, None
    for r in range(restarts):
        mapping = prob.greedy_mapping() if r == 0 else prob.random_mapping(random.Random(seed + r))
        score = kernel.hill_climb(prob.inst, prob.rel1, prob.r2, prob.inc_ptr, prob.inc_idx, mapping)
        if score > best_score:
            best_score, best_map = int(score), list(mapping)
    prf = PRF(best_score, _triple_total(g1, mode, lemma_table, include_instances),
              _triple_total(g2, mode, lemma_table, include_instances))
    mapping = {prob.ids1[i]: prob.ids2[j] for i, j in enumerate(best_map) if j >= 0}
    return SmatchResult(prf, mapping)


def triples(graph: GenericGraph, mode: str = "surface", lemma_table: Optional[dict] = None,
            include_instances: bool = True) -> Counter:
    """The triple multiset of a graph, keyed by node id."""
    out = Counter()
    if include_instances:
        for n, content in graph.nodes.items():
            key = content_key(content, mode, lemma_table)
            if key is not None:
                out[("instance", n, key)] += 1
    for s, t, _ in graph.edges:
        out[("rel", s, t)] += 1
    return out


def matched_triples(g1: GenericGraph, g2: GenericGraph, mapping: dict, mode: str = "surface",
                    lemma_table: Optional[dict] = None, include_instances: bool = True) -> int:
    """Size of the triple-multiset intersection after renaming ``g1`` nodes by ``mapping``."""
    t2 = triples(g2, mode, lemma_table, include_instances)
    renamed = Counter()
    for (kind, a, b), c in triples(g1, mode, lemma_table, include_instances).items():
        if kind == "instance":
            if a in mapping:
                renamed[(kind, mapping[a], b)] += c
        elif a in mapping and b in mapping:
            renamed[(kind, mapping[a], mapping[b])] += c
    return sum((renamed & t2).values())


def smatch_exact(g1: GenericGraph, g2: GenericGraph, mode: str = "surface",
                 lemma_table: Optional[dict] = None, include_instances: bool = True,
                 max_nodes: int = 8, max_mappings: int = 5_000_000) -> SmatchResult:
    """Exact SMATCH by enumerating every injection of the smaller node set.

    Extending a mapping never loses a triple, so full injections of the
    smaller side cover the optimum.
    """
    ids1, ids2 = list(g1.nodes), list(g2.nodes)
    small = min(len(ids1), len(ids2))
    if small > max_nodes:
        raise SizeError(f"smaller graph has {small} nodes; exact search allows {max_nodes}")
    count = math.perm(max(len(ids1), len(ids2)), small)
    if count > max_mappings:
        raise SizeError(f"{count} mappings exceed the limit of {max_mappings}")
    t2 = triples(g2, mode, lemma_table, include_instances)
    t1 = triples(g1, mode, lemma_table, include_instances)
    best, best_map = -1, {}
    if len(ids1) <= len(ids2):
        candidates = (dict(zip(ids1, perm)) for perm in itertools.permutations(ids2, len(ids1)))
    else:
        candidates = ({a: b for a, b in zip(perm, ids2)}
                      for perm in itertools.permutations(ids1, len(ids2)))
    for mapping in candidates:
        renamed = Counter()
        for (kind, a, b), c in t1.items():
            if kind == "instance":
                if a in mapping:
                    renamed[(kind, mapping[a], b)] += c
            elif a in mapping and b in mapping:
                renamed[(kind, mapping[a], mapping[b])] += c
        score = sum((renamed & t2).values())
        if score > best:
            best, best_map = score, mapping
    prf = PRF(best, sum(t1.values()), sum(t2.values()))
    return SmatchResult(prf, best_map)
