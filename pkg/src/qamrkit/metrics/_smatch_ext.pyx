# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hill-climbing kernel for unlabeled SMATCH.

Same contract and move order as ``_smatch_py``; see that module for the
meaning of each argument. Arrays must be C-contiguous ``int32``.
"""

import numpy as np


ctypedef int i32


cdef inline int _rel_value(const i32[:, ::1] rel1, const i32[:, ::1] r2,
                           i32[::1] mapping, Py_ssize_t r) nogil:
    cdef int x = mapping[rel1[r, 0]]
    cdef int y = mapping[rel1[r, 1]]
    cdef int c, v
    if x < 0 or y < 0:
        return 0
    c = rel1[r, 2]
    v = r2[x, y]
    return c if c < v else v


cdef int _local(const i32[:, ::1] inst, const i32[:, ::1] rel1, const i32[:, ::1] r2,
                const i32[::1] inc_ptr, const i32[::1] inc_idx, i32[::1] mapping,
                int i, int k) nogil:
    cdef int total = 0
    cdef int node, n, p, r
    for n in range(2):
        node = i if n == 0 else k
        if node < 0:
            continue
        if mapping[node] >= 0:
            total += inst[node, mapping[node]]
        for p in range(inc_ptr[node], inc_ptr[node + 1]):
            r = inc_idx[p]
            if node == k and (rel1[r, 0] == i or rel1[r, 1] == i):
                continue
            total += _rel_value(rel1, r2, mapping, r)
    return total


cdef long _score(const i32[:, ::1] inst, const i32[:, ::1] rel1, const i32[:, ::1] r2,
                 i32[::1] m) nogil:
    cdef Py_ssize_t i, r
    cdef long total = 0
    for i in range(m.shape[0]):
        if m[i] >= 0:
            total += inst[i, m[i]]
    for r in range(rel1.shape[0]):
        total += _rel_value(rel1, r2, m, r)
    return total


def _matrix(rows, n, m):
    # explicit shape so empty graphs still give 2-D buffers
    return np.ascontiguousarray(rows, dtype=np.int32).reshape(n, m)


def score(inst, rel1, r2, mapping):
    cdef const i32[:, ::1] inst_v = _matrix(inst, len(mapping), len(r2))
    cdef const i32[:, ::1] rel_v = np.ascontiguousarray(rel1, dtype=np.int32).reshape(-1, 3)
    cdef const i32[:, ::1] r2_v = _matrix(r2, len(r2), len(r2))
    cdef i32[::1] m = np.array(mapping, dtype=np.int32)
    return _score(inst_v, rel_v, r2_v, m)


def hill_climb(inst, rel1, r2, inc_ptr, inc_idx, mapping):
    """Best-improvement climb; updates ``mapping`` in place and returns the score."""
    cdef const i32[:, ::1] inst_v = _matrix(inst, len(mapping), len(r2))
    cdef const i32[:, ::1] rel_v = np.ascontiguousarray(rel1, dtype=np.int32).reshape(-1, 3)
    cdef const i32[:, ::1] r2_v = _matrix(r2, len(r2), len(r2))
    cdef const i32[::1] ptr_v = np.ascontiguousarray(inc_ptr, dtype=np.int32)
    cdef const i32[::1] idx_v = np.ascontiguousarray(inc_idx, dtype=np.int32)
    m_arr = np.array(mapping, dtype=np.int32)
    cdef i32[::1] m = m_arr
    cdef int n1 = m.shape[0]
    cdef int n2 = r2_v.shape[0]
    used_arr = np.zeros(max(n2, 1), dtype=np.int32)
    cdef i32[::1] used = used_arr
    cdef int i, j, k, old, before, gain, best_gain, best_kind, best_a, best_b, tmp
    cdef long current
    for i in range(n1):
        if m[i] >= 0:
            used[m[i]] = 1
    current = _score(inst_v, rel_v, r2_v, m)
    with nogil:
        while True:
            best_gain = 0
            best_kind = -1
            best_a = 0
            best_b = 0
            for i in range(n1):
                old = m[i]
                before = _local(inst_v, rel_v, r2_v, ptr_v, idx_v, m, i, -1)
                for j in range(n2):
                    if used[j]:
                        continue
                    m[i] = j
                    gain = _local(inst_v, rel_v, r2_v, ptr_v, idx_v, m, i, -1) - before
                    m[i] = old
                    if gain > best_gain:
                        best_gain = gain
                        best_kind = 0
                        best_a = i
                        best_b = j
            for i in range(n1):
                for k in range(i + 1, n1):
                    if m[i] == m[k]:
                        continue
                    before = _local(inst_v, rel_v, r2_v, ptr_v, idx_v, m, i, k)
                    tmp = m[i]; m[i] = m[k]; m[k] = tmp
                    gain = _local(inst_v, rel_v, r2_v, ptr_v, idx_v, m, i, k) - before
                    tmp = m[i]; m[i] = m[k]; m[k] = tmp
                    if gain > best_gain:
                        best_gain = gain
                        best_kind = 1
                        best_a = i
                        best_b = k
            if best_kind < 0:
                break
            if best_kind == 0:
                if m[best_a] >= 0:
                    used[m[best_a]] = 0
                m[best_a] = best_b
                used[best_b] = 1
            else:
                tmp = m[best_a]; m[best_a] = m[best_b]; m[best_b] = tmp
            current += best_gain
    for i in range(n1):
        mapping[i] = m[i]
    return current
