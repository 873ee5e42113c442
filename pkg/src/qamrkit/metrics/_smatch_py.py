"""Pure-Python hill-climbing kernel for unlabeled SMATCH.

Mirrors ``_smatch_ext.pyx`` move for move: both enumerate moves in the same
order, use exact integer gains and keep the first best move, so they return
identical mappings for identical inputs.

Inputs (all integer, lists of lists or arrays):

``inst``     n1 x n2, 1 where node i of graph 1 may match node j of graph 2
``rel1``     E1 x 3 rows ``(a, b, count)`` of distinct graph-1 relations
``r2``       n2 x n2 relation counts of graph 2
``inc_ptr``, ``inc_idx``  CSR lists of the rel1 rows incident to each node
``mapping``  length n1, graph-2 index or -1; updated in place
"""


def _rel_value(rel1, r2, mapping, r):
    a, b, c = rel1[r][0], rel1[r][1], rel1[r][2]
    x, y = mapping[a], mapping[b]
    if x < 0 or y < 0:
        return 0
    v = r2[x][y]
    return c if c < v else v


def _local(inst, rel1, r2, inc_ptr, inc_idx, mapping, i, k):
    """Score of the triples touching nodes i and k (k may be -1)."""
    total = 0
    for node in (i, k):
        if node < 0:
            continue
        if mapping[node] >= 0:
            total += inst[node][mapping[node]]
        for p in range(inc_ptr[node], inc_ptr[node + 1]):
            r = inc_idx[p]
            if node == k and (rel1[r][0] == i or rel1[r][1] == i):
                continue
            total += _rel_value(rel1, r2, mapping, r)
    return total


def score(inst, rel1, r2, mapping):
    total = 0
    for i, j in enumerate(mapping):
        if j >= 0:
            total += inst[i][j]
    for r in range(len(rel1)):
        total += _rel_value(rel1, r2, mapping, r)
    return total


def hill_climb(inst, rel1, r2, inc_ptr, inc_idx, mapping):
    n1 = len(mapping)
    n2 = len(r2)
    used = [False] * n2
    for j in mapping:
        if j >= 0:
            used[j] = True
    current = score(inst, rel1, r2, mapping)
    while True:
        best_gain = 0
        best = None
        for i in range(n1):
            old = mapping[i]
            before = _local(inst, rel1, r2, inc_ptr, inc_idx, mapping, i, -1)
            for j in range(n2):
                if used[j]:
                    continue
                mapping[i] = j
                gain = _local(inst, rel1, r2, inc_ptr, inc_idx, mapping, i, -1) - before
                mapping[i] = old
                if gain > best_gain:
                    best_gain, best = gain, (0, i, j)
        for i in range(n1):
            for k in range(i + 1, n1):
                if mapping[i] == mapping[k]:
                    continue
                before = _local(inst, rel1, r2, inc_ptr, inc_idx, mapping, i, k)
                mapping[i], mapping[k] = mapping[k], mapping[i]
                gain = _local(inst, rel1, r2, inc_ptr, inc_idx, mapping, i, k) - before
                mapping[i], mapping[k] = mapping[k], mapping[i]
                if gain > best_gain:
                    best_gain, best = gain, (1, i, k)
        if best is None:
            return current
        kind, i, x = best
        if kind == 0:
            if mapping[i] >= 0:
                used[mapping[i]] = False
            mapping[i] = x
            used[x] = True
        else:
            mapping[i], mapping[x] = mapping[x], mapping[i]
        current += best_gain
