"""
Graph core for distid.

Immutable simple undirected graphs with dense integer vertex ids, BFS
distance matrices, closed balls, components, bipartiteness and the small
graph corpora every other module tests against.

Distances count edges: d(u,u) = 0 and neighbours are at distance 1.
Vertices in different components are at distance UNREACHABLE, which is
never inside a ball of any radius (including INFINITY).
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

UNREACHABLE = int(np.iinfo(np.int64).max)
INFINITY = math.inf

# A radius is a positive integer or INFINITY
Radius = Union[int, float]

# Largest order the small-graph enumerators accept
MAX_SMALL_ORDER = 9


class RoleKind(Enum):
    GADGET = 'gadget'
    ELEMENT = 'element'
    SET = 'set'
    SET_TWIN = 'settwin'
    PATH = 'path'
    APEX = 'apex'
    APEX_PATH = 'apexpath'
    PLAIN = 'plain'


@dataclass(frozen=True)
class RoleLabel:
    """Construction role of a vertex in a reduction graph."""
    kind: RoleKind
    copy: Optional[str] = None
    name: Optional[str] = None
    i: Optional[int] = None
    j: Optional[int] = None
    k: Optional[int] = None

    @classmethod
    def gadget(cls, copy, name):
        return cls(RoleKind.GADGET, copy=copy, name=name)

    @classmethod
    def element(cls, i):
        return cls(RoleKind.ELEMENT, i=i)

    @classmethod
    def set_vertex(cls, j):
        return cls(RoleKind.SET, j=j)

    @classmethod
    def set_twin(cls, j):
        return cls(RoleKind.SET_TWIN, j=j)

    @classmethod
    def path(cls, i, j, k):
        """Path vertex l^k_{i,j}; j is None when the path is shared by every set containing i."""
        return cls(RoleKind.PATH, i=i, j=j, k=k)

    @classmethod
    def apex(cls):
        return cls(RoleKind.APEX)

    @classmethod
    def apex_path(cls, k):
        return cls(RoleKind.APEX_PATH, k=k)

    @classmethod
    def plain(cls):
        return cls(RoleKind.PLAIN)


PLAIN = RoleLabel.plain()


class Graph:
    """Immutable simple undirected graph on vertices 0..vertex_count-1."""

    __slots__ = ('_n', '_edges', '_labels', '_adj')

    def __init__(self, vertex_count: int, edges: Iterable[Tuple[int, int]] = (),
                 labels: Optional[Sequence[RoleLabel]] = None):
        if vertex_count < 0:
            raise ValueError(f'vertex_count must be non-negative, got {vertex_count}')

        normalized = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f'self-loop at vertex {u}')
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f'edge ({u}, {v}) has an endpoint outside 0..{vertex_count - 1}')
            normalized.add((u, v) if u < v else (v, u))

        adj = [set() for _ in range(vertex_count)]
        for u, v in normalized:
            adj[u].add(v)
            adj[v].add(u)

        if labels is not None:
            labels = tuple(labels)
            if len(labels) != vertex_count:
                raise ValueError(f'label map covers {len(labels)} of {vertex_count} vertices')

        self._n = vertex_count
        self._edges = frozenset(normalized)
        self._labels = labels
        self._adj = tuple(frozenset(a) for a in adj)

    @classmethod
    def from_edges(cls, vertex_count, edges, labels=None):
        return cls(vertex_count, edges, labels)

    @property
    def vertex_count(self) -> int:
        return self._n

    @property
    def edges(self) -> FrozenSet[Tuple[int, int]]:
        return self._edges

    @property
    def labels(self) -> Optional[Tuple[RoleLabel, ...]]:
        return self._labels

    def __len__(self):
        return self._n

    def vertices(self) -> range:
        return range(self._n)

    def edge_count(self) -> int:
        return len(self._edges)

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self._edges)

    def neighbors(self, v: int) -> FrozenSet[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def label(self, v: int) -> RoleLabel:
        if self._labels is None:
            return PLAIN
        return self._labels[v]

    def with_labels(self, labels: Sequence[RoleLabel]) -> 'Graph':
        return Graph(self._n, self._edges, labels)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self._n, self._edges, self._labels) == (other._n, other._edges, other._labels)

    def __hash__(self):
        return hash((self._n, self._edges, self._labels))

    def __repr__(self):
        return f'Graph(n={self._n}, m={len(self._edges)})'


class DistanceMatrix:
    """All-pairs edge-count distances of a graph; read-only."""

    __slots__ = ('dist',)

    def __init__(self, dist: np.ndarray):
        dist = np.array(dist, dtype=np.int64)
        dist.setflags(write=False)
        self.dist = dist

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __getitem__(self, key):
        return self.dist[key]

    def row(self, v: int) -> np.ndarray:
        return self.dist[v]

    def ball_mask(self, v: int, r: Radius) -> np.ndarray:
        return in_ball(self.dist[v], r)


def in_ball(d, r: Radius):
    """Whether distance(s) d lie within radius r (works on scalars and arrays)."""
    return (d != UNREACHABLE) & (d <= r)


def check_radius(r: Radius) -> Radius:
    """Validate a radius: a positive integer or INFINITY."""
    if r == INFINITY:
        return INFINITY
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValueError(f'radius must be a positive integer or infinity, got {r!r}')
    return int(r)


def format_radius(r: Radius) -> str:
    return 'inf' if r == INFINITY else str(int(r))


def _bfs_levels(g: Graph, source: int) -> Dict[int, int]:
    seen = {}
    level = 0
    nextlevel = {source}
    while nextlevel:
        thislevel = nextlevel
        nextlevel = set()
        for v in thislevel:
            if v not in seen:
                seen[v] = level
                nextlevel.update(g.neighbors(v))
        level += 1
    return seen


def all_pairs_distances(g: Graph) -> DistanceMatrix:
    """BFS from every vertex; UNREACHABLE across components."""
    n = len(g)
    dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
    for source in g.vertices():
        for target, d in _bfs_levels(g, source).items():
            dist[source, target] = d
    return DistanceMatrix(dist)


def closed_ball(g: Graph, dm: DistanceMatrix, v: int, r: Radius) -> FrozenSet[int]:
    """N_r[v]; for r = INFINITY this is the component of v."""
    return frozenset(int(w) for w in np.flatnonzero(dm.ball_mask(v, r)))


def components(g: Graph) -> List[FrozenSet[int]]:
    """Connected components, ordered by smallest vertex."""
    seen = set()
    result = []
    for v in g.vertices():
        if v in seen:
            continue
        comp = frozenset(_bfs_levels(g, v))
        seen |= comp
        result.append(comp)
    return result


def is_connected(g: Graph) -> bool:
    return len(components(g)) <= 1


def two_coloring(g: Graph) -> Optional[Tuple[int, ...]]:
    """A proper 2-coloring (0/1 per vertex), or None if g has an odd cycle."""
    color = [-1] * len(g)
    for root in g.vertices():
        if color[root] != -1:
            continue
        color[root] = 0
        frontier = [root]
        while frontier:
            nxt = []
            for v in frontier:
                for w in g.neighbors(v):
                    if color[w] == -1:
                        color[w] = 1 - color[v]
                        nxt.append(w)
                    elif color[w] == color[v]:
                        return None
            frontier = nxt
    return tuple(color)


def is_bipartite(g: Graph) -> bool:
    return two_coloring(g) is not None


def twin_pairs(g: Graph) -> List[Tuple[int, int]]:
    """Pairs x < y with N(x) = N(y), ascending."""
    groups: Dict[FrozenSet[int], List[int]] = {}
    for v in g.vertices():
        groups.setdefault(g.neighbors(v), []).append(v)
    pairs = []
    for members in groups.values():
        pairs.extend(itertools.combinations(members, 2))
    return sorted(pairs)


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> Tuple[Graph, Dict[int, int]]:
    """G[vertices] relabelled to 0..k-1 in ascending old-id order, with the old->new map."""
    keep = sorted(set(vertices))
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    labels = None
    if g.labels is not None:
        labels = [g.labels[v] for v in keep]
    return Graph(len(keep), edges, labels), index


def disjoint_union(*graphs: Graph) -> Graph:
    offset = 0
    edges = []
    for h in graphs:
        edges.extend((u + offset, v + offset) for u, v in h.edges)
        offset += len(h)
    return Graph(offset, edges)


# ---------------------------------------------------------------------------
# Named families
# ---------------------------------------------------------------------------

def empty_graph(n: int) -> Graph:
    return Graph(n)


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError(f'a cycle needs at least 3 vertices, got {n}')
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(n, itertools.combinations(range(n), 2))


def named_families(max_n: int) -> List[Graph]:
    """Paths, cycles, complete graphs up to max_n, plus K_2 + K_1 and two isolated vertices."""
    graphs = []
    for n in range(1, max_n + 1):
        graphs.append(path_graph(n))
        if n >= 3:
            graphs.append(cycle_graph(n))
            graphs.append(complete_graph(n))
    if max_n >= 2:
        graphs.append(empty_graph(2))
    if max_n >= 3:
        graphs.append(disjoint_union(complete_graph(2), empty_graph(1)))
    return graphs


def _check_order(max_n):
    if not 1 <= max_n <= MAX_SMALL_ORDER:
        raise ValueError(f'max_n must be within 1..{MAX_SMALL_ORDER}, got {max_n}')


def random_graph(rng: np.random.Generator, max_n: int) -> Graph:
    n = int(rng.integers(1, max_n + 1))
    density = float(rng.uniform(0.2, 0.8))
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < density
    return Graph(n, [p for p, k in zip(pairs, keep) if k])


def enumerate_small_graphs(max_n: int, seed: int, count: int) -> Iterator[Graph]:
    """Named families first, then seeded random graphs, `count` graphs in total.

    The stream is fully determined by (max_n, seed, count).
    """
    _check_order(max_n)
    rng = np.random.default_rng(seed)
    produced = 0
    seen = set()
    for g in named_families(max_n):
        if produced >= count:
            return
        seen.add(g)
        produced += 1
        yield g
    while produced < count:
        g = random_graph(rng, max_n)
        if g in seen:
            continue
        seen.add(g)
        produced += 1
        yield g


def enumerate_all_graphs(max_n: int) -> Iterator[Graph]:
    """Every labelled graph on 1..max_n vertices."""
    _check_order(max_n)
    for n in range(1, max_n + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1 << len(pairs)):
            yield Graph(n, [p for bit, p in enumerate(pairs) if mask >> bit & 1])


def standard_corpus(max_n: int = 6, seed: int = 2024, count: int = 50,
                    exhaustive_n: int = 5) -> List[Graph]:
    """Named families and seeded graphs up to max_n plus every graph up to exhaustive_n.

    Duplicates are dropped; order is stable for a given argument tuple.
    """
    corpus = []
    seen = set()
    sources = itertools.chain(
        named_families(max_n),
        enumerate_all_graphs(min(exhaustive_n, max_n)) if exhaustive_n > 0 else (),
        enumerate_small_graphs(max_n, seed, len(named_families(max_n)) + count),
    )
    for g in sources:
        if g not in seen:
            seen.add(g)
            corpus.append(g)
    logger.debug(f'standard corpus: {len(corpus)} graphs (max_n={max_n}, seed={seed})')
    return corpus
