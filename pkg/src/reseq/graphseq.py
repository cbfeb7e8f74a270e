"""Complete-graph sequencing: Hamiltonian paths/cycles and MST key-frame paths.

Small instances (n <= exact_threshold) are solved exactly with Held-Karp
dynamic programming; larger ones with greedy nearest-neighbor construction
from every admissible start followed by 2-opt and Or-opt local search until
no improving move remains.  All solvers are deterministic for a given seed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .frameset import DistanceMatrix

EXACT_THRESHOLD_DEFAULT = 12


@dataclass(frozen=True, eq=False)
class CompleteGraph:
    """The complete weighted graph over a distance matrix (lossless wrapper)."""

    matrix: DistanceMatrix

    def __post_init__(self):
        if len(self.matrix) < 2:
            raise ContractError("a complete graph needs at least 2 frames")

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def ids(self) -> tuple[str, ...]:
        return self.matrix.frame_ids

    def weight(self, i: int, j: int) -> float:
        return float(self.matrix.values[i, j])

    @property
    def edge_count(self) -> int:
        return self.n * (self.n - 1) // 2

    def index_of(self, frame_id: str) -> int:
        return self.matrix.index_of(frame_id)


def build_graph(m: DistanceMatrix) -> CompleteGraph:
    return CompleteGraph(m)


@dataclass(frozen=True, eq=False)
class MstTree:
    """Minimum spanning tree as an edge list plus adjacency."""

    frame_ids: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]  # (u, v, weight), u < v
    adjacency: tuple[tuple[tuple[int, float], ...], ...]

    @property
    def n(self) -> int:
        return len(self.frame_ids)

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def index_of(self, frame_id: str) -> int:
        try:
            return self.frame_ids.index(frame_id)
        except ValueError:
            raise ContractError(f"unknown frame id {frame_id!r}") from None


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def minimum_spanning_tree(g: CompleteGraph) -> MstTree:
    """Kruskal's algorithm; edge ties broken by lexicographic (u, v)."""
    n = g.n
    iu, jv = np.triu_indices(n, k=1)
    weights = g.matrix.values[iu, jv].astype(np.float64)
    order = sorted(range(len(weights)), key=lambda k: (weights[k], iu[k], jv[k]))
    uf = _UnionFind(n)
    edges = []
    for k in order:
        u, v = int(iu[k]), int(jv[k])
        if uf.union(u, v):
            edges.append((u, v, float(weights[k])))
            if len(edges) == n - 1:
                break
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u, v, w in edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    return MstTree(
        frame_ids=g.ids,
        edges=tuple(edges),
        adjacency=tuple(tuple(a) for a in adj),
    )


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    exact_threshold: int = EXACT_THRESHOLD_DEFAULT
    two_opt_passes: int = 0  # 0 = sweep until no improving move


@dataclass(frozen=True, eq=False)
class SequenceResult:
    """An ordered traversal plus its cost and provenance."""

    kind: str  # "path" | "cycle" | "keyframe"
    order: tuple[str, ...]
    total_cost: float
    solver: str
    seed: int | None = None
    constraints: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        if self.kind not in ("path", "cycle", "keyframe"):
            raise ContractError(f"unknown sequence kind {self.kind!r}")
        if not self.order:
            raise ContractError("sequence order must be non-empty")
        # key-frame traversals may revisit nodes; tours and paths may not
        if self.kind != "keyframe" and len(set(self.order)) != len(self.order):
            raise ContractError(f"{self.kind} order contains duplicate frame ids")
        if not np.isfinite(self.total_cost) or self.total_cost < 0:
            raise ContractError("total cost must be finite and >= 0")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "order": list(self.order),
            "total_cost": self.total_cost,
            "solver": self.solver,
            "seed": self.seed,
            "constraints": self.constraints,
        }


def sequence_cost(m: DistanceMatrix, order: list[int] | tuple[int, ...], cycle: bool = False) -> float:
    v = m.values
    total = 0.0
    for a, b in zip(order, order[1:]):
        total += float(v[a, b])
    if cycle and len(order) > 1:
        total += float(v[order[-1], order[0]])
    return total


def _resolve_node(g: CompleteGraph, node) -> int:
    if node is None:
        raise ContractError("node must not be None")
    if isinstance(node, (int, np.integer)):
        if not (0 <= int(node) < g.n):
            raise ContractError(f"node index {node} out of range")
        return int(node)
    return g.index_of(node)


# ---------------------------------------------------------------------------
# exact dynamic programming


def _held_karp_path(
    d: np.ndarray, start: int | None, end: int | None
) -> tuple[list[int], float]:
    """Exact shortest Hamiltonian path over all nodes of `d`.

    dp[mask][j] = cheapest path visiting exactly `mask`, ending at j; free
    start means every singleton is a base case.  Ties resolve to the lowest
    predecessor/terminal index.
    """
    n = d.shape[0]
    full = (1 << n) - 1
    inf = np.inf
    dp = [[inf] * n for _ in range(1 << n)]
    parent = [[-1] * n for _ in range(1 << n)]
    if start is None:
        for j in range(n):
            dp[1 << j][j] = 0.0
    else:
        dp[1 << start][start] = 0.0
    for mask in range(1 << n):
        row = dp[mask]
        for j in range(n):
            cj = row[j]
            if cj == inf:
                continue
            dj = d[j]
            for t in range(n):
                if mask & (1 << t):
                    continue
                nm = mask | (1 << t)
                cand = cj + dj[t]
                if cand < dp[nm][t]:
                    dp[nm][t] = cand
                    parent[nm][t] = j
    if end is None:
        best_j = min(range(n), key=lambda j: (dp[full][j], j))
    else:
        best_j = end
    cost = dp[full][best_j]
    order = []
    mask, j = full, best_j
    while j != -1:
        order.append(j)
        pj = parent[mask][j]
        mask ^= 1 << j
        j = pj
    order.reverse()
    return order, float(cost)


def _held_karp_cycle(d: np.ndarray) -> tuple[list[int], float]:
    """Exact shortest Hamiltonian cycle, anchored at node 0."""
    n = d.shape[0]
    full = (1 << n) - 1
    inf = np.inf
    dp = [[inf] * n for _ in range(1 << n)]
    parent = [[-1] * n for _ in range(1 << n)]
    dp[1][0] = 0.0
    for mask in range(1, 1 << n):
        if not mask & 1:
            continue
        row = dp[mask]
        for j in range(n):
            cj = row[j]
            if cj == inf:
                continue
            dj = d[j]
            for t in range(1, n):
                if mask & (1 << t):
                    continue
                nm = mask | (1 << t)
                cand = cj + dj[t]
                if cand < dp[nm][t]:
                    dp[nm][t] = cand
                    parent[nm][t] = j
    best_j = min(range(1, n), key=lambda j: (dp[full][j] + d[j, 0], j))
    cost = dp[full][best_j] + d[best_j, 0]
    order = []
    mask, j = full, best_j
    while j != -1:
        order.append(j)
        pj = parent[mask][j]
        mask ^= 1 << j
        j = pj
    order.reverse()
    return order, float(cost)


# ---------------------------------------------------------------------------
# heuristic construction and local search


def _nearest_neighbor_order(
    d: np.ndarray, start: int, end: int | None
) -> list[int]:
    """Greedy chain from `start`; a fixed `end` is withheld until last."""
    n = d.shape[0]
    free = np.ones(n, dtype=bool)
    free[start] = False
    if end is not None:
        free[end] = False
    order = [start]
    cur = start
    for _ in range(int(free.sum())):
        row = np.where(free, d[cur], np.inf)
        cur = int(np.argmin(row))  # ties -> lowest index
        free[cur] = False
        order.append(cur)
    if end is not None:
        order.append(end)
    return order


def _two_opt_pass_path(order: list[int], d: np.ndarray, lock_first: bool, lock_last: bool) -> float:
    """One sweep of segment reversals on an open path; returns total gain."""
    n = len(order)
    gain = 0.0
    lo = 1 if lock_first else 0
    hi = n - 2 if lock_last else n - 1
    arr = np.array(order)
    for i in range(lo, hi):
        # reversing order[i..j] replaces edges (i-1,i) and (j,j+1)
        js = np.arange(i + 1, hi + 1)
        if js.size == 0:
            continue
        left = d[arr[i - 1], arr[i]] if i > 0 else 0.0
        right = np.where(js + 1 < n, d[arr[js], arr[np.minimum(js + 1, n - 1)]], 0.0)
        new_left = d[arr[i - 1], arr[js]] if i > 0 else 0.0
        new_right = np.where(js + 1 < n, d[arr[i], arr[np.minimum(js + 1, n - 1)]], 0.0)
        delta = (new_left + new_right) - (left + right)
        k = int(np.argmin(delta))
        if delta[k] < -1e-12:
            j = int(js[k])
            arr[i : j + 1] = arr[i : j + 1][::-1]
            gain -= float(delta[k])
    order[:] = arr.tolist()
    return gain


def _or_opt_pass_path(order: list[int], d: np.ndarray, lock_first: bool, lock_last: bool) -> float:
    """One sweep of segment relocations (lengths 1..3) on an open path."""
    n = len(order)
    gain = 0.0
    lo = 1 if lock_first else 0
    hi = n - 1 if lock_last else n
    for seg_len in (1, 2, 3):
        i = lo
        while i + seg_len <= hi:
            removed = _relocate_best(order, d, i, seg_len, lo, hi)
            if removed > 0:
                gain += removed
            else:
                i += 1
    return gain


def _relocate_best(order: list[int], d: np.ndarray, i: int, seg_len: int, lo: int, hi: int) -> float:
    """Try moving order[i:i+seg_len] to its best other slot; apply if it helps."""
    n = len(order)
    seg = order[i : i + seg_len]
    rest = order[:i] + order[i + seg_len :]
    # cost removed at the cut
    before = order[i - 1] if i > 0 else None
    after = order[i + seg_len] if i + seg_len < n else None
    removed = 0.0
    if before is not None:
        removed += d[before, seg[0]]
    if after is not None:
        removed += d[seg[-1], after]
    if before is not None and after is not None:
        removed -= d[before, after]
    best_delta = -1e-12
    best_pos = None
    # insertion between rest[p-1] and rest[p]; p limited to keep locked ends fixed
    p_lo = 1 if lo == 1 else 0
    p_hi = (len(rest) - 1) if hi == n - 1 else len(rest)
    for p in range(p_lo, p_hi + 1):
        if p == i:  # same slot
            continue
        prev = rest[p - 1] if p > 0 else None
        nxt = rest[p] if p < len(rest) else None
        added = 0.0
        if prev is not None:
            added += d[prev, seg[0]]
        if nxt is not None:
            added += d[seg[-1], nxt]
        if prev is not None and nxt is not None:
            added -= d[prev, nxt]
        delta = added - removed
        if delta < best_delta:
            best_delta = delta
            best_pos = p
    if best_pos is None:
        return 0.0
    order[:] = rest[:best_pos] + seg + rest[best_pos:]
    return -float(best_delta)


def _local_search_path(
    order: list[int], d: np.ndarray, lock_first: bool, lock_last: bool, max_rounds: int
) -> None:
    rounds = 0
    while True:
        gain = _two_opt_pass_path(order, d, lock_first, lock_last)
        gain += _or_opt_pass_path(order, d, lock_first, lock_last)
        rounds += 1
        if gain <= 1e-12 or (max_rounds and rounds >= max_rounds):
            return


def shortest_hamiltonian_path(
    g: CompleteGraph,
    start=None,
    end=None,
    config: SolverConfig = SolverConfig(),
) -> SequenceResult:
    """Minimum-total-distance ordering of all frames, optionally pinned at
    either or both endpoints."""
    n = g.n
    s = _resolve_node(g, start) if start is not None else None
    t = _resolve_node(g, end) if end is not None else None
    if s is not None and t is not None and s == t:
        raise ContractError("start and end must differ")
    d = g.matrix.values.astype(np.float64)

    if n <= config.exact_threshold:
        order, cost = _held_karp_path(d, s, t)
        solver = "held-karp"
    else:
        starts = [s] if s is not None else list(range(n))
        best_order = None
        best_cost = np.inf
        for st in starts:
            if t is not None and st == t:
                continue
            cand = _nearest_neighbor_order(d, st, t)
            _local_search_path(
                cand, d, lock_first=s is not None, lock_last=t is not None,
                max_rounds=config.two_opt_passes,
            )
            c = sequence_cost(g.matrix, cand)
            if c < best_cost - 1e-12:
                best_cost = c
                best_order = cand
        order, cost = best_order, best_cost
        solver = "nn+2opt+oropt"

    ids = g.ids
    constraints = {
        "start": ids[s] if s is not None else None,
        "end": ids[t] if t is not None else None,
        "keyframes": None,
    }
    return SequenceResult(
        kind="path",
        order=tuple(ids[i] for i in order),
        total_cost=float(cost),
        solver=solver,
        seed=config.seed,
        constraints=constraints,
    )


def _canonical_cycle(order: list[int], ids: tuple[str, ...], d: np.ndarray) -> list[int]:
    """Rotate so the lexicographically smallest id leads, orient so its
    cheaper neighbor comes second (ties: smaller second id)."""
    pos = min(range(len(order)), key=lambda p: ids[order[p]])
    rotated = order[pos:] + order[:pos]
    nxt, prv = rotated[1], rotated[-1]
    head = rotated[0]
    flip = False
    if d[head, prv] < d[head, nxt]:
        flip = True
    elif d[head, prv] == d[head, nxt] and ids[prv] < ids[nxt]:
        flip = True
    if flip:
        rotated = [rotated[0]] + rotated[1:][::-1]
    return rotated


def _two_opt_pass_cycle(order: list[int], d: np.ndarray) -> float:
    """One sweep of 2-opt reversals on a closed tour."""
    n = len(order)
    gain = 0.0
    arr = np.array(order)
    for i in range(1, n - 1):
        js = np.arange(i + 1, n)
        a, b = arr[i - 1], arr[i]
        cs = arr[js]
        ds = arr[(js + 1) % n]
        delta = (d[a, cs] + d[b, ds]) - (d[a, b] + d[cs, ds])
        # reversing arr[i..j]; skip the full-reversal no-op j == n-1 with i == 1
        k = int(np.argmin(delta))
        if delta[k] < -1e-12:
            j = int(js[k])
            arr[i : j + 1] = arr[i : j + 1][::-1]
            gain -= float(delta[k])
    order[:] = arr.tolist()
    return gain


def shortest_hamiltonian_cycle(
    g: CompleteGraph, config: SolverConfig = SolverConfig()
) -> SequenceResult:
    """Minimum-total-distance closed tour, reported in canonical form."""
    n = g.n
    if n < 3:
        raise ContractError("a cycle needs at least 3 frames")
    d = g.matrix.values.astype(np.float64)
    if n <= config.exact_threshold:
        order, cost = _held_karp_cycle(d)
        solver = "held-karp"
    else:
        best_order = None
        best_cost = np.inf
        for st in range(n):
            cand = _nearest_neighbor_order(d, st, None)
            rounds = 0
            while True:
                gain = _two_opt_pass_cycle(cand, d)
                gain += _or_opt_pass_cycle(cand, d)
                rounds += 1
                if gain <= 1e-12 or (config.two_opt_passes and rounds >= config.two_opt_passes):
                    break
            c = sequence_cost(g.matrix, cand, cycle=True)
            if c < best_cost - 1e-12:
                best_cost = c
                best_order = cand
        order, cost = best_order, best_cost
        solver = "nn+2opt+oropt"

    ids = g.ids
    order = _canonical_cycle(list(order), ids, d)
    cost = sequence_cost(g.matrix, order, cycle=True)
    return SequenceResult(
        kind="cycle",
        order=tuple(ids[i] for i in order),
        total_cost=float(cost),
        solver=solver,
        seed=config.seed,
        constraints={"start": None, "end": None, "keyframes": None},
    )


def _or_opt_pass_cycle(order: list[int], d: np.ndarray) -> float:
    """Segment relocation sweep on a closed tour (segment lengths 1..3)."""
    n = len(order)
    gain = 0.0
    for seg_len in (1, 2, 3):
        i = 0
        while i < n:
            cur = order[:]  # rotation keeps indexing simple: move seg to front
            seg = [cur[(i + k) % n] for k in range(seg_len)]
            if n - seg_len < 2:
                break
            rest = [cur[(i + seg_len + k) % n] for k in range(n - seg_len)]
            before, after = rest[-1], rest[0]
            removed = d[before, seg[0]] + d[seg[-1], after] - d[before, after]
            best_delta = -1e-12
            best_p = None
            for p in range(1, len(rest)):
                prev, nxt = rest[p - 1], rest[p]
                added = d[prev, seg[0]] + d[seg[-1], nxt] - d[prev, nxt]
                delta = added - removed
                if delta < best_delta:
                    best_delta = delta
                    best_p = p
            if best_p is not None:
                order[:] = rest[:best_p] + seg + rest[best_p:]
                gain -= float(best_delta)
                i = 0  # tour re-indexed; restart this segment length
            else:
                i += 1
    return gain


# ---------------------------------------------------------------------------
# key-frame paths in the MST


def _tree_path(t: MstTree, u: int, v: int) -> list[int]:
    """Unique u-v path, found by depth-first parent tracing."""
    if u == v:
        return [u]
    parent = {u: None}
    stack = [u]
    while stack:
        cur = stack.pop()
        if cur == v:
            break
        for nbr, _ in t.adjacency[cur]:
            if nbr not in parent:
                parent[nbr] = cur
                stack.append(nbr)
    if v not in parent:
        raise ContractError("tree is not connected")  # cannot happen for a valid MST
    path = [v]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def keyframe_path(t: MstTree, keyframes: list[str]) -> SequenceResult:
    """Concatenated MST paths between consecutive key-frames.

    The junction key-frame shared by two segments is emitted once; nodes
    revisited by different segments are kept (only seams are deduplicated).
    """
    if len(keyframes) < 2:
        raise ContractError("need at least 2 keyframes")
    idx = [t.index_of(k) for k in keyframes]
    for a, b in zip(idx, idx[1:]):
        if a == b:
            raise ContractError("consecutive keyframes must be distinct")
    order: list[int] = []
    for a, b in zip(idx, idx[1:]):
        seg = _tree_path(t, a, b)
        order.extend(seg if not order else seg[1:])
    wmap = {}
    for u, v, w in t.edges:
        wmap[(u, v)] = w
        wmap[(v, u)] = w
    cost = sum(wmap[(a, b)] for a, b in zip(order, order[1:]))
    return SequenceResult(
        kind="keyframe",
        order=tuple(t.frame_ids[i] for i in order),
        total_cost=float(cost),
        solver="mst-path",
        seed=None,
        constraints={"start": None, "end": None, "keyframes": list(keyframes)},
    )
