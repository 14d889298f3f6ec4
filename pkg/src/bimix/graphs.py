"""Labeled graphs, trees, the edge order and its Kruskal partition scheme,
bipartite star/cloud graphs, and hypergraphs.

Vertices are 1-based throughout, matching the usual [n] = {1, ..., n}.
Edges are stored as sorted pairs (i, j) with i < j.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

N_MAX = 7
M_MAX = 4

Edge = tuple[int, int]


class EnumerationBoundError(ValueError):
    pass


def edge(i: int, j: int) -> Edge:
    if i == j:
        raise ValueError(f"self-loop {{{i},{j}}}")
    return (i, j) if i < j else (j, i)


def edge_key(e) -> tuple[int, int]:
    """Sort key realizing the edge order: larger top vertex first, then larger bottom vertex."""
    i, j = edge(*e)
    return (-j, -i)


def edge_precedes(e, e2) -> bool:
    """Strict total order on edges: e precedes e2 iff j2 < j, or j == j2 and i2 < i."""
    return edge_key(e) < edge_key(e2)


@dataclass(frozen=True)
class LabeledGraph:
    n: int
    edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        es = frozenset(edge(*e) for e in self.edges)
        for i, j in es:
            if not (1 <= i < j <= self.n):
                raise ValueError(f"edge {(i, j)} out of range for n={self.n}")
        object.__setattr__(self, "edges", es)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=edge_key)

    def neighbors(self, v: int) -> list[int]:
        return [j if i == v else i for i, j in self.edges if v in (i, j)]

    def is_connected(self) -> bool:
        return _connected(self.n, self.edges)

    def is_tree(self) -> bool:
        return len(self.edges) == self.n - 1 and self.is_connected()


def _find(parent, u):
    while parent[u] != u:
        parent[u] = parent[parent[u]]
        u = parent[u]
    return u


def _connected(n: int, edges) -> bool:
    if n <= 1:
        return True
    parent = list(range(n + 1))
    comps = n
    for i, j in edges:
        a, b = _find(parent, i), _find(parent, j)
        if a != b:
            parent[a] = b
            comps -= 1
    return comps == 1


def all_edges(n: int) -> list[Edge]:
    return [(i, j) for j in range(2, n + 1) for i in range(1, j)]


def _check_bound(n: int, bound: int, what: str = "n"):
    if n < 1:
        raise ValueError(f"{what} must be >= 1")
    if n > bound:
        raise EnumerationBoundError(f"{what}={n} exceeds enumeration bound {bound}")


@lru_cache(maxsize=None)
def _connected_edge_sets(n: int) -> tuple[frozenset, ...]:
    pool = all_edges(n)
    out = []
    for mask in range(1 << len(pool)):
        es = [pool[b] for b in range(len(pool)) if mask >> b & 1]
        if len(es) >= n - 1 and _connected(n, es):
            out.append(frozenset(es))
    if n == 1:
        out = [frozenset()]
    return tuple(out)


def enumerate_connected(n: int, n_max: int = N_MAX) -> list[LabeledGraph]:
    """All connected labeled graphs on [n] (brute force over edge subsets)."""
    _check_bound(n, n_max)
    return [LabeledGraph(n, es) for es in _connected_edge_sets(n)]


def _prufer_decode(seq, n: int) -> list[Edge]:
    degree = [1] * (n + 1)
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = min(u for u in range(1, n + 1) if degree[u] == 1)
        edges.append(edge(leaf, v))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = [x for x in range(1, n + 1) if degree[x] == 1]
    edges.append(edge(u, w))
    return edges


@lru_cache(maxsize=None)
def _tree_edge_sets(n: int) -> tuple[frozenset, ...]:
    if n == 1:
        return (frozenset(),)
    if n == 2:
        return (frozenset({(1, 2)}),)
    return tuple(frozenset(_prufer_decode(seq, n))
                 for seq in itertools.product(range(1, n + 1), repeat=n - 2))


def enumerate_trees(n: int, n_max: int = N_MAX) -> list[LabeledGraph]:
    """All labeled trees on [n], via Prufer sequences."""
    _check_bound(n, n_max)
    return [LabeledGraph(n, es) for es in _tree_edge_sets(n)]


def kruskal_tree_of(g: LabeledGraph) -> LabeledGraph:
    """Spanning tree kept by scanning the edges of g in increasing edge order."""
    parent = list(range(g.n + 1))
    kept = []
    for i, j in g.sorted_edges():
        a, b = _find(parent, i), _find(parent, j)
        if a != b:
            parent[a] = b
            kept.append((i, j))
    if len(kept) != g.n - 1:
        raise ValueError("graph is not connected")
    return LabeledGraph(g.n, kept)


def tree_path(tau: LabeledGraph, i: int, j: int) -> list[Edge]:
    """Edges on the unique path from i to j in the tree tau."""
    adj = {v: [] for v in range(1, tau.n + 1)}
    for a, b in tau.edges:
        adj[a].append(b)
        adj[b].append(a)
    prev = {i: None}
    stack = [i]
    while stack:
        u = stack.pop()
        if u == j:
            break
        for w in adj[u]:
            if w not in prev:
                prev[w] = u
                stack.append(w)
    path = []
    u = j
    while prev[u] is not None:
        path.append(edge(u, prev[u]))
        u = prev[u]
    return path


def e_prime_of(tau: LabeledGraph) -> frozenset[Edge]:
    """Non-tree edges {i,j} whose tau-path consists only of edges preceding {i,j}."""
    if not tau.is_tree():
        raise ValueError("input is not a tree")
    out = set()
    for e in all_edges(tau.n):
        if e in tau.edges:
            continue
        if all(edge_precedes(p, e) for p in tree_path(tau, *e)):
            out.add(e)
    return frozenset(out)


def partition_closure(tau: LabeledGraph) -> LabeledGraph:
    """The top R(tau) of the interval [tau, R(tau)]."""
    return LabeledGraph(tau.n, tau.edges | e_prime_of(tau))


def partition_check(n: int) -> dict:
    """Verify that the intervals [tau, R(tau)] partition the connected graphs on [n]."""
    trees = enumerate_trees(n)
    tally = 0
    eprime = {}
    for tau in trees:
        ep = e_prime_of(tau)
        eprime[tau.edges] = ep
        tally += 2 ** len(ep)
    connected = _connected_edge_sets(n)
    misplaced = 0
    for es in connected:
        g = LabeledGraph(n, es)
        owners = [t for t in trees if t.edges <= es <= (t.edges | eprime[t.edges])]
        if len(owners) != 1 or owners[0].edges != kruskal_tree_of(g).edges:
            misplaced += 1
    return {
        "n": n,
        "trees": len(trees),
        "connected": len(connected),
        "sum_2_pow_eprime": tally,
        "misplaced": misplaced,
        "passed": tally == len(connected) and misplaced == 0,
    }


def crucial_star_check(max_vertices: int = 6) -> dict:
    """Exhaustively test the three star/cloud implications for all trees with m + r <= max_vertices.

    For a cloud k and distinct stars s, s' not adjacent in tau:
    (a) {k,s}, {k,s'} in E(tau) implies {s,s'} in E'(tau);
    (b) {k,s} in E(tau) and {k,s'} in E'(tau) implies {s,s'} in E'(tau);
    (c) {k,s}, {k,s'} in E'(tau) implies {s,s'} in E'(tau).
    """
    counts = Counter()
    violations = []
    for n in range(2, max_vertices + 1):
        for tau in enumerate_trees(n):
            ep = e_prime_of(tau)
            for m in range(2, n):
                for k in range(m + 1, n + 1):
                    for s, s2 in itertools.permutations(range(1, m + 1), 2):
                        if edge(s, s2) in tau.edges:
                            continue
                        ks, ks2 = edge(k, s), edge(k, s2)
                        target = edge(s, s2) in ep
                        for case, premise in (
                            ("a", ks in tau.edges and ks2 in tau.edges),
                            ("b", ks in tau.edges and ks2 in ep),
                            ("c", ks in ep and ks2 in ep),
                        ):
                            if premise:
                                counts[case] += 1
                                if not target:
                                    violations.append((case, n, m, sorted(tau.edges), k, s, s2))
    return {"checked": dict(counts), "violations": violations, "passed": not violations}


@dataclass(frozen=True)
class BipartiteStarGraph:
    """Graph on m stars (1..m) and r clouds (m+1..m+r) with no cloud-cloud edges
    and every cloud adjacent to at least two distinct stars (one if ``leaf_clouds``)."""

    m: int
    r: int
    edges: frozenset[Edge] = field(default_factory=frozenset)
    leaf_clouds: bool = False

    def __post_init__(self):
        es = frozenset(edge(*e) for e in self.edges)
        n = self.m + self.r
        for i, j in es:
            if not (1 <= i < j <= n):
                raise ValueError(f"edge {(i, j)} out of range")
            if i > self.m:
                raise ValueError(f"cloud-cloud edge {(i, j)}")
        for k in range(self.m + 1, n + 1):
            if sum(1 for i, j in es if j == k) < (1 if self.leaf_clouds else 2):
                raise ValueError(f"cloud {k} has too few star neighbors")
        object.__setattr__(self, "edges", es)

    @property
    def n(self) -> int:
        return self.m + self.r

    def star_edges(self) -> list[Edge]:
        return sorted(e for e in self.edges if e[1] <= self.m)

    def cloud_edges(self) -> list[Edge]:
        return sorted(e for e in self.edges if e[1] > self.m)

    def as_labeled(self) -> LabeledGraph:
        return LabeledGraph(self.n, self.edges)


@lru_cache(maxsize=None)
def _star_edge_sets(m: int, r: int, connected_only: bool, trees_only: bool,
                    leaf_clouds: bool = False) -> tuple[frozenset, ...]:
    star_pool = all_edges(m)
    lo = 1 if leaf_clouds else 2
    cloud_choices = [c for size in range(lo, m + 1) for c in itertools.combinations(range(1, m + 1), size)]
    n = m + r
    out = []
    for mask in range(1 << len(star_pool)):
        ss = [star_pool[b] for b in range(len(star_pool)) if mask >> b & 1]
        for choice in itertools.product(cloud_choices, repeat=r):
            es = list(ss)
            for idx, stars in enumerate(choice):
                k = m + 1 + idx
                es.extend((s, k) for s in stars)
            if trees_only and len(es) != n - 1:
                continue
            if (connected_only or trees_only) and not _connected(n, es):
                continue
            out.append(frozenset(es))
    return tuple(out)


def enumerate_bipartite_star(m: int, r: int, connected_only: bool = True,
                             trees_only: bool = False, n_max: int = N_MAX,
                             leaf_clouds: bool = False) -> list[BipartiteStarGraph]:
    """Graphs of the star/cloud class, optionally restricted to connected graphs or trees.

    ``leaf_clouds`` drops the two-star requirement on cloud vertices (clouds may
    hang off a single star). Only the cloud-cloud edge ban remains; this is the
    tree class that the tree-graph bound sums over.
    """
    if m < 0 or r < 0 or m + r < 1:
        raise ValueError("need m, r >= 0 and m + r >= 1")
    _check_bound(m + r, n_max, "m + r")
    if r > 0 and m < 2:
        return []
    return [BipartiteStarGraph(m, r, es, leaf_clouds)
            for es in _star_edge_sets(m, r, connected_only, trees_only, leaf_clouds)]


@dataclass(frozen=True)
class Hypergraph:
    """Hypergraph on vertices 1..m; hyperedges are frozensets of size >= 2 with multiplicities."""

    m: int
    hyperedges: tuple[frozenset, ...] = ()
    multiplicities: tuple[int, ...] | None = None

    def __post_init__(self):
        hs = tuple(frozenset(J) for J in self.hyperedges)
        for J in hs:
            if len(J) < 2:
                raise ValueError(f"hyperedge {set(J)} has fewer than two vertices")
            if not all(1 <= v <= self.m for v in J):
                raise ValueError(f"hyperedge {set(J)} out of range")
        mult = self.multiplicities
        if mult is None:
            mult = (1,) * len(hs)
        mult = tuple(int(k) for k in mult)
        if len(mult) != len(hs) or any(k < 1 for k in mult):
            raise ValueError("multiplicities must be positive, one per hyperedge")
        object.__setattr__(self, "hyperedges", hs)
        object.__setattr__(self, "multiplicities", mult)

    def is_connected(self) -> bool:
        parent = list(range(self.m + 1))
        for J in self.hyperedges:
            vs = sorted(J)
            for v in vs[1:]:
                a, b = _find(parent, vs[0]), _find(parent, v)
                if a != b:
                    parent[a] = b
        roots = {_find(parent, v) for v in range(1, self.m + 1)}
        return len(roots) == 1


def hyperedges_of(m: int) -> list[frozenset]:
    return [frozenset(c) for size in range(2, m + 1) for c in itertools.combinations(range(1, m + 1), size)]


@lru_cache(maxsize=None)
def _connected_hyperedge_sets(m: int, pairs_only: bool) -> tuple[tuple[frozenset, ...], ...]:
    pool = [J for J in hyperedges_of(m) if not pairs_only or len(J) == 2]
    out = []
    for mask in range(1, 1 << len(pool)):
        hs = tuple(pool[b] for b in range(len(pool)) if mask >> b & 1)
        if Hypergraph(m, hs).is_connected():
            out.append(hs)
    return tuple(out)


def enumerate_connected_hypergraphs(m: int, pairs_only: bool = False,
                                    m_max: int = M_MAX) -> list[Hypergraph]:
    """All connected hypergraphs on [m] without repeated hyperedges."""
    if m < 2:
        raise ValueError("need m >= 2")
    _check_bound(m, m_max, "m")
    return [Hypergraph(m, hs) for hs in _connected_hyperedge_sets(m, pairs_only)]


def hypergraph_to_bipartite(h: Hypergraph) -> BipartiteStarGraph:
    """One cloud per hyperedge copy, joined to every star of that hyperedge."""
    es = []
    k = h.m
    for J, mult in zip(h.hyperedges, h.multiplicities):
        for _ in range(mult):
            k += 1
            es.extend((s, k) for s in sorted(J))
    return BipartiteStarGraph(h.m, k - h.m, es)


def set_partitions(items):
    """All set partitions of a list, each as a list of blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for idx in range(len(part)):
            yield part[:idx] + [[first] + part[idx]] + part[idx + 1:]
