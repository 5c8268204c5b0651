"""Finite truncations of the degree-(K+1) canopy tree.

The truncation is the complete subtree below a single vertex at distance L
from the leaf boundary: every vertex at depth d >= 1 has exactly K children
at depth d-1, the leaves sit at depth 0, and the root simply has no parent.
Vertices are enumerated breadth-first from the root with children ordered
left-to-right, so all derived objects are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import (
    IncompleteSubtreeError,
    InvalidArgumentError,
    TilingMismatchError,
    TooLargeError,
)
from .graph_core import FiniteGraph

DEFAULT_VERTEX_CAP = 200_000


def tree_size(k: int, depth: int) -> int:
    """Vertex count of the complete k-ary tree of the given depth."""
    return (k ** (depth + 1) - 1) // (k - 1)


@dataclass(frozen=True)
class TruncatedCanopy:
    K: int
    L: int
    graph: FiniteGraph
    depth: tuple[int, ...]  # distance to the leaf boundary
    parent: tuple[int, ...]  # -1 for the root
    children: tuple[tuple[int, ...], ...]

    @property
    def root(self) -> int:
        return 0

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    def precedes(self, v: int, w: int) -> bool:
        """v lies on the path from w down to the boundary (v below-or-equal w)."""
        while self.depth[v] < self.depth[w] and v != -1:
            v = self.parent[v]
        return v == w


def build_truncated_canopy(
    K: int, L: int, vertex_cap: int = DEFAULT_VERTEX_CAP
) -> TruncatedCanopy:
    if K < 2:
        raise InvalidArgumentError("branching factor K must be >= 2")
    if L < 0:
        raise InvalidArgumentError("truncation depth L must be >= 0")
    n = tree_size(K, L)
    if n > vertex_cap:
        raise TooLargeError(f"canopy would have {n} vertices (cap {vertex_cap})")
    depth = [L]
    parent = [-1]
    children: list[tuple[int, ...]] = []
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            if depth[v] == 0:
                children.append(())
                continue
            kids = []
            for _ in range(K):
                u = len(depth)
                depth.append(depth[v] - 1)
                parent.append(v)
                kids.append(u)
                nxt.append(u)
            children.append(tuple(kids))
        frontier = nxt
    edges = tuple(
        (min(v, parent[v]), max(v, parent[v])) for v in range(1, n)
    )
    labels = {v: ("depth", depth[v]) for v in range(n)}
    graph = FiniteGraph(n, tuple(sorted(edges)), labels)
    return TruncatedCanopy(K, L, graph, tuple(depth), tuple(parent), tuple(children))


def forward_neighbors(t: TruncatedCanopy, w: int) -> tuple[int, ...]:
    """N_w: the vertices one step closer to the boundary (empty at leaves)."""
    if not (0 <= w < t.vertex_count):
        raise InvalidArgumentError(f"vertex {w} out of range")
    return t.children[w]


def subtree(t: TruncatedCanopy, w: int, j: int) -> tuple[int, ...]:
    """All descendants of w within distance j, in BFS order starting at w."""
    if j < 0:
        raise InvalidArgumentError("subtree depth j must be >= 0")
    if not (0 <= w < t.vertex_count):
        raise InvalidArgumentError(f"vertex {w} out of range")
    if t.depth[w] < j:
        raise IncompleteSubtreeError(
            f"vertex {w} has depth {t.depth[w]} < requested subtree depth {j}"
        )
    out = [w]
    frontier = [w]
    for _ in range(j):
        nxt = []
        for v in frontier:
            nxt.extend(t.children[v])
        out.extend(nxt)
        frontier = nxt
    return tuple(out)


@dataclass(frozen=True)
class PatchSet:
    """The tiling of the truncation by depth-l subtrees Lambda_l(x) rooted at
    the potential-root vertices (depths l, 2l+1, 3l+2, ...)."""

    l: int
    roots: tuple[int, ...]
    patch_of: tuple[int, ...]  # vertex -> its patch root

    def patch_vertices(self, root: int) -> tuple[int, ...]:
        return tuple(v for v, r in enumerate(self.patch_of) if r == root)


def potential_roots(t: TruncatedCanopy, l: int) -> PatchSet:
    if l < 1:
        raise InvalidArgumentError("patch depth l must be >= 1")
    if t.L % (l + 1) != l:
        raise TilingMismatchError(
            f"L={t.L} is not congruent to l={l} mod l+1; patches would not tile"
        )
    roots = tuple(
        v for v in range(t.vertex_count) if t.depth[v] % (l + 1) == l
    )
    patch_of = [-1] * t.vertex_count
    for v in range(t.vertex_count):
        target = (t.depth[v] // (l + 1)) * (l + 1) + l
        w = v
        while t.depth[w] != target:
            w = t.parent[w]
        patch_of[v] = w
    return PatchSet(l, roots, tuple(patch_of))


def to_json(t: TruncatedCanopy) -> str:
    return json.dumps(
        {
            "K": t.K,
            "L": t.L,
            "depth": list(t.depth),
            "parent": list(t.parent),
        }
    )
