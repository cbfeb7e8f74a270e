"""Independent reference implementations used only by tests.

Everything here is written as directly as possible (exhaustive enumeration,
double loops, textbook algorithms) and deliberately shares no code with the
package under test.
"""

from itertools import permutations

import numpy as np

_PERM_CACHE: dict[int, np.ndarray] = {}


def perm_array(k: int) -> np.ndarray:
    """All k! permutations of range(k) as an int8 array (cached)."""
    if k not in _PERM_CACHE:
        _PERM_CACHE[k] = np.array(list(permutations(range(k))), dtype=np.int8)
    return _PERM_CACHE[k]


def _rows_cost(d: np.ndarray, rows: np.ndarray) -> np.ndarray:
    total = np.zeros(rows.shape[0], dtype=np.float64)
    for a in range(rows.shape[1] - 1):
        total += d[rows[:, a].astype(np.intp), rows[:, a + 1].astype(np.intp)]
    return total


def brute_path_free(d: np.ndarray) -> float:
    """Cheapest open path over all nodes, both endpoints free."""
    n = d.shape[0]
    rows = perm_array(n)
    rows = rows[rows[:, 0] < rows[:, -1]]  # reversal dedup
    return float(_rows_cost(d, rows).min())


def brute_path_fixed(d: np.ndarray, s: int, t: int) -> float:
    """Cheapest open path pinned to start s and end t."""
    n = d.shape[0]
    others = np.array([i for i in range(n) if i not in (s, t)], dtype=np.int8)
    mid = others[perm_array(n - 2)]
    rows = np.empty((mid.shape[0], n), dtype=np.int8)
    rows[:, 0] = s
    rows[:, 1:-1] = mid
    rows[:, -1] = t
    return float(_rows_cost(d, rows).min())


def brute_cycle(d: np.ndarray) -> float:
    """Cheapest closed tour; rotations fixed at node 0, reflections deduped
    by requiring second < last, enumerated in chunks by the second node."""
    n = d.shape[0]
    best = np.inf
    rest = list(range(1, n))
    base = perm_array(n - 2)
    for second in rest:
        others = np.array([i for i in rest if i != second], dtype=np.int8)
        tail = others[base]
        tail = tail[tail[:, -1] > second]
        if tail.shape[0] == 0:
            continue
        rows = np.empty((tail.shape[0], n), dtype=np.int8)
        rows[:, 0] = 0
        rows[:, 1] = second
        rows[:, 2:] = tail
        cost = _rows_cost(d, rows) + d[rows[:, -1].astype(np.intp), 0]
        best = min(best, float(cost.min()))
    return best


def discordant_pairs_naive(ground: list, candidate: list) -> int:
    """O(m^2) double-loop count of discordant index pairs."""
    pos = {fid: p for p, fid in enumerate(candidate)}
    m = len(ground)
    count = 0
    for i in range(m):
        for j in range(i + 1, m):
            if pos[ground[i]] > pos[ground[j]]:
                count += 1
    return count


def lpips_triple_loop(tensors_a, tensors_b, weight_vectors) -> float:
    """Eq.-by-eq. LPIPS: per layer, spatial average of the squared norm of
    the weighted channel difference, summed over layers."""
    total = 0.0
    for ta, tb, w in zip(tensors_a, tensors_b, weight_vectors):
        c, h, wid = ta.shape
        acc = 0.0
        for y in range(h):
            for x in range(wid):
                s = 0.0
                for ch in range(c):
                    diff = w[ch] * (float(ta[ch, y, x]) - float(tb[ch, y, x]))
                    s += diff * diff
                acc += s
        total += acc / (h * wid)
    return total


def cosine_triple_loop(tensors_a, tensors_b) -> float:
    """Sum over layers of (1 - spatial mean of channel dot products)."""
    total = 0.0
    for ta, tb in zip(tensors_a, tensors_b):
        c, h, wid = ta.shape
        acc = 0.0
        for y in range(h):
            for x in range(wid):
                dot = 0.0
                for ch in range(c):
                    dot += float(ta[ch, y, x]) * float(tb[ch, y, x])
                acc += dot
        total += 1.0 - acc / (h * wid)
    return total


def prim_mst_weight(d: np.ndarray) -> float:
    """Textbook Prim's algorithm, total weight only."""
    n = d.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = d[0].astype(np.float64).copy()
    total = 0.0
    for _ in range(n - 1):
        masked = np.where(in_tree, np.inf, best)
        v = int(np.argmin(masked))
        total += float(masked[v])
        in_tree[v] = True
        best = np.minimum(best, d[v])
    return total


def bfs_tree_path(adjacency, u: int, v: int) -> list[int]:
    """Unique tree path by breadth-first search."""
    from collections import deque

    parent = {u: None}
    q = deque([u])
    while q:
        cur = q.popleft()
        if cur == v:
            break
        for nbr, _w in adjacency[cur]:
            if nbr not in parent:
                parent[nbr] = cur
                q.append(nbr)
    path = [v]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def finite_difference(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi.flat[i] += eps
        lo.flat[i] -= eps
        g.flat[i] = (f(hi) - f(lo)) / (2 * eps)
    return g
