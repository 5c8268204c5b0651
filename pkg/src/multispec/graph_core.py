"""Undirected simple graphs and the two explicit glued constructions.

Vertices are dense integer indices 0..n-1; edges are stored as a sorted
tuple of sorted pairs so every derived object (matrices, automorphism
searches) iterates deterministically.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError

UNREACHABLE = -1

# First ten primes, enough for every construction exercised here.
PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


@dataclass(frozen=True)
class FiniteGraph:
    """Undirected simple graph on vertices 0..vertex_count-1."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    labels: dict[int, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.vertex_count < 0:
            raise InvalidArgumentError("vertex_count must be non-negative")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise InvalidArgumentError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.vertex_count):
                raise InvalidArgumentError(f"bad edge ({u},{v})")
            if (u, v) in seen:
                raise InvalidArgumentError(f"duplicate edge ({u},{v})")
            seen.add((u, v))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj:
            lst.sort()
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


def make_graph(vertex_count: int, edges, labels=None) -> FiniteGraph:
    """Canonicalize an edge iterable (sort endpoints, sort and dedup pairs)."""
    canon = sorted({(min(u, v), max(u, v)) for u, v in edges})
    return FiniteGraph(vertex_count, tuple(canon), dict(labels or {}))


def path_graph(k: int) -> FiniteGraph:
    """Simple path on k vertices 0..k-1."""
    if k < 1:
        raise InvalidArgumentError("path_graph needs k >= 1")
    return FiniteGraph(k, tuple((i, i + 1) for i in range(k - 1)))


def adjacency_matrix(g: FiniteGraph) -> np.ndarray:
    """Dense symmetric 0/1 adjacency matrix with zero diagonal."""
    m = np.zeros((g.vertex_count, g.vertex_count))
    for u, v in g.edges:
        m[u, v] = m[v, u] = 1.0
    return m


def adjacency_sparse(g: FiniteGraph) -> sp.csr_matrix:
    rows, cols = [], []
    for u, v in g.edges:
        rows += [u, v]
        cols += [v, u]
    data = np.ones(len(rows))
    return sp.csr_matrix(
        (data, (rows, cols)), shape=(g.vertex_count, g.vertex_count)
    )


@dataclass(frozen=True)
class GluedGraphSpec:
    """Pieces to be joined through m fresh junction vertices.

    attach_points[i][j] is the vertex of piece i wired to junction j;
    repeats within a piece are allowed.
    """

    pieces: tuple[FiniteGraph, ...]
    attach_points: tuple[tuple[int, ...], ...]
    junction_count: int

    def __post_init__(self):
        if self.junction_count < 1:
            raise InvalidArgumentError("junction_count must be >= 1")
        if not self.pieces:
            raise InvalidArgumentError("need at least one piece")
        if len(self.pieces) != len(self.attach_points):
            raise InvalidArgumentError("one attach tuple per piece required")
        for piece, attach in zip(self.pieces, self.attach_points):
            if len(attach) != self.junction_count:
                raise InvalidArgumentError(
                    "each piece needs one attach point per junction"
                )
            for v in attach:
                if not (0 <= v < piece.vertex_count):
                    raise InvalidArgumentError(f"attach point {v} not in piece")


@dataclass(frozen=True)
class GluedGraph:
    """Result of gluing: the graph plus the bookkeeping the eigenvector
    constructions need (junction indices and per-piece vertex ranges)."""

    graph: FiniteGraph
    junctions: tuple[int, ...]
    piece_offsets: tuple[int, ...]  # global index of vertex 0 of each piece
    spec: GluedGraphSpec

    def piece_vertices(self, i: int) -> range:
        start = self.piece_offsets[i]
        return range(start, start + self.spec.pieces[i].vertex_count)


def glue_subgraphs(spec: GluedGraphSpec) -> GluedGraph:
    """Disjoint union of the pieces plus edges {x_j, v_{i,j}} for every
    piece i and junction j. Junctions occupy indices 0..m-1."""
    m = spec.junction_count
    labels: dict[int, object] = {j: f"x_{j + 1}" for j in range(m)}
    offsets = []
    edges: list[tuple[int, int]] = []
    base = m
    for i, piece in enumerate(spec.pieces):
        offsets.append(base)
        for u, v in piece.edges:
            edges.append((base + u, base + v))
        for idx, lab in piece.labels.items():
            labels[base + idx] = (i, lab)
        base += piece.vertex_count
    logical = len(edges)
    for i, attach in enumerate(spec.attach_points):
        for j, v in enumerate(attach):
            edges.append((j, offsets[i] + v))
            logical += 1
    canon = sorted({(min(u, v), max(u, v)) for u, v in edges})
    if len(canon) != logical:
        raise InvalidArgumentError(
            "distinct logical edges collapsed to the same vertex pair"
        )
    graph = FiniteGraph(base, tuple(canon), labels)
    return GluedGraph(graph, tuple(range(m)), tuple(offsets), spec)


def prime_paths_graph(piece_count: int, scale: int = 2) -> GluedGraph:
    """Glue paths of scale*p_i - 1 vertices (p_i the i-th prime) between two
    junctions, each path attached by its endpoints."""
    if piece_count < 1:
        raise InvalidArgumentError("piece_count must be >= 1")
    if scale not in (2, 3):
        raise InvalidArgumentError("scale must be 2 or 3")
    if piece_count > len(PRIMES):
        raise InvalidArgumentError(f"at most {len(PRIMES)} pieces supported")
    pieces = []
    attach = []
    for i in range(piece_count):
        size = scale * PRIMES[i] - 1
        pieces.append(path_graph(size))
        attach.append((0, size - 1))
    spec = GluedGraphSpec(tuple(pieces), tuple(attach), junction_count=2)
    return glue_subgraphs(spec)


def bfs_distance(g: FiniteGraph, u: int, v: int) -> int:
    """Graph metric d(u,v); UNREACHABLE (-1) across components."""
    for w in (u, v):
        if not (0 <= w < g.vertex_count):
            raise InvalidArgumentError(f"vertex {w} out of range")
    if u == v:
        return 0
    adj = g.neighbors()
    dist = {u: 0}
    queue = deque([u])
    while queue:
        w = queue.popleft()
        for nb in adj[w]:
            if nb not in dist:
                dist[nb] = dist[w] + 1
                if nb == v:
                    return dist[nb]
                queue.append(nb)
    return UNREACHABLE


def bfs_all_distances(g: FiniteGraph, u: int) -> list[int]:
    """Distances from u to every vertex (UNREACHABLE where disconnected)."""
    adj = g.neighbors()
    dist = [UNREACHABLE] * g.vertex_count
    dist[u] = 0
    queue = deque([u])
    while queue:
        w = queue.popleft()
        for nb in adj[w]:
            if dist[nb] == UNREACHABLE:
                dist[nb] = dist[w] + 1
                queue.append(nb)
    return dist


def to_edge_list_text(g: FiniteGraph) -> str:
    lines = [f"{g.vertex_count} {g.edge_count}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def from_edge_list_text(text: str) -> FiniteGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidArgumentError("empty edge-list input")
    try:
        n, m = map(int, lines[0].split())
        edges = [tuple(map(int, ln.split())) for ln in lines[1 : m + 1]]
    except ValueError as exc:
        raise InvalidArgumentError(f"malformed edge list: {exc}") from exc
    if len(edges) != m:
        raise InvalidArgumentError("edge count does not match header")
    return make_graph(n, edges)


def to_json(g: FiniteGraph) -> str:
    return json.dumps(
        {
            "n": g.vertex_count,
            "edges": [list(e) for e in g.edges],
            "labels": {str(k): repr(v) for k, v in sorted(g.labels.items())},
        }
    )


def from_json(text: str) -> FiniteGraph:
    obj = json.loads(text)
    return make_graph(obj["n"], [tuple(e) for e in obj["edges"]])
