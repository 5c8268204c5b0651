"""Cayley-type graphs: fibers of a base graph indexed by group elements,
wired through anchor vertices along the generators.

Finite groups give exact realizations. Truncated infinite groups (Z^d box,
free-group ball) have an open boundary: inter-fiber edges whose product
leaves the enumeration are simply absent, and downstream constructions only
use interior fibers.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .errors import InvalidArgumentError, TooLargeError, UnsupportedError
from .graph_core import FiniteGraph

DEFAULT_VERTEX_CAP = 200_000


class GroupSpec:
    """An enumerated finitely generated group (or a truncation of one).

    ``mul`` is total for finite kinds and returns None when the product
    falls outside the enumeration of a truncated kind.
    """

    def __init__(self, kind, elements, generators, mul, finite):
        self.kind = kind
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise InvalidArgumentError("duplicate group elements")
        for g in generators:
            if g not in self.index:
                raise InvalidArgumentError(f"generator {g!r} not in element list")
        self.generators = tuple(generators)
        self.generator_indices = tuple(self.index[g] for g in self.generators)
        self._mul = mul
        self.finite = finite
        self._inv_cache: dict[int, int | None] = {}
        self.identity = self._find_identity()
        self.interior = tuple(self._is_interior(i) for i in range(self.size))
        self._spot_check()

    @property
    def size(self) -> int:
        return len(self.elements)

    def mul(self, i: int, j: int) -> int | None:
        return self._mul(i, j)

    def inverse(self, i: int) -> int | None:
        if i not in self._inv_cache:
            self._inv_cache[i] = next(
                (
                    j
                    for j in range(self.size)
                    if self._mul(i, j) == self.identity
                    and self._mul(j, i) == self.identity
                ),
                None,
            )
        return self._inv_cache[i]

    def _find_identity(self) -> int:
        for e in range(self.size):
            if all(
                self._mul(e, i) in (i, None) and self._mul(i, e) in (i, None)
                for i in range(self.size)
            ):
                if self._mul(e, e) == e:
                    return e
        raise InvalidArgumentError("no identity element found")

    def _is_interior(self, i: int) -> bool:
        for gi in self.generator_indices:
            if self._mul(i, gi) is None:
                return False
            inv = self.inverse_generator(gi)
            if inv is None or self._mul(i, inv) is None:
                return False
        return True

    def inverse_generator(self, gi: int) -> int | None:
        # generator inverses always lie in the enumeration for the kinds built here
        return self.inverse(gi)

    def _spot_check(self):
        rng = random.Random(0)
        n = self.size
        if self.finite:
            for i in range(n):
                if self.inverse(i) is None:
                    raise InvalidArgumentError(f"element {i} has no inverse")
                for j in range(n):
                    if self._mul(i, j) is None:
                        raise InvalidArgumentError("finite group has partial product")
        for _ in range(min(50, n * n)):
            a, b, c = (rng.randrange(n) for _ in range(3))
            ab = self._mul(a, b)
            bc = self._mul(b, c)
            if ab is not None and bc is not None:
                left = self._mul(ab, c)
                right = self._mul(a, bc)
                if left is not None and right is not None and left != right:
                    raise InvalidArgumentError("multiplication is not associative")


def cyclic_group(m: int, generator: int = 1) -> GroupSpec:
    if m < 1:
        raise InvalidArgumentError("cyclic order must be >= 1")
    gens = (generator % m,) if m > 1 else (0,)
    return GroupSpec("cyclic", range(m), gens, lambda i, j: (i + j) % m, True)


def product_of_cyclics(moduli: tuple[int, ...]) -> GroupSpec:
    if not moduli or any(m < 1 for m in moduli):
        raise InvalidArgumentError("moduli must be positive")
    elements: list[tuple[int, ...]] = [()]
    for m in moduli:
        elements = [e + (r,) for e in elements for r in range(m)]
    index = {e: i for i, e in enumerate(elements)}

    def mul(i, j):
        a, b = elements[i], elements[j]
        return index[tuple((x + y) % m for x, y, m in zip(a, b, moduli))]

    gens = [
        tuple(1 if k == d else 0 for k in range(len(moduli)))
        for d in range(len(moduli))
        if moduli[d] > 1
    ]
    if not gens:
        gens = [tuple(0 for _ in moduli)]
    return GroupSpec("product_of_cyclics", elements, gens, mul, True)


def zd_box(d: int, radius: int) -> GroupSpec:
    """Truncation of Z^d to the box [-radius, radius]^d with unit generators."""
    if d < 1 or radius < 0:
        raise InvalidArgumentError("need d >= 1 and radius >= 0")
    elements: list[tuple[int, ...]] = [()]
    for _ in range(d):
        elements = [e + (r,) for e in elements for r in range(-radius, radius + 1)]
    index = {e: i for i, e in enumerate(elements)}

    def mul(i, j):
        s = tuple(x + y for x, y in zip(elements[i], elements[j]))
        return index.get(s)

    gens = [tuple(1 if k == dd else 0 for k in range(d)) for dd in range(d)]
    return GroupSpec("zd_box", elements, gens, mul, False)


def _reduce_word(word: tuple[int, ...]) -> tuple[int, ...]:
    out: list[int] = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def free_group_ball(n_generators: int, radius: int) -> GroupSpec:
    """Reduced words of length <= radius over n free generators."""
    if n_generators < 1 or radius < 0:
        raise InvalidArgumentError("need n_generators >= 1 and radius >= 0")
    letters = [s for i in range(1, n_generators + 1) for s in (i, -i)]
    elements: list[tuple[int, ...]] = [()]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for s in letters:
                if w and w[-1] == -s:
                    continue
                nxt.append(w + (s,))
        elements.extend(nxt)
        frontier = nxt
    index = {e: i for i, e in enumerate(elements)}

    def mul(i, j):
        return index.get(_reduce_word(elements[i] + elements[j]))

    gens = [(i,) for i in range(1, n_generators + 1)]
    return GroupSpec("free_ball", elements, gens, mul, False)


def from_table(elements, table, generators) -> GroupSpec:
    """Explicit multiplication table: table[i][j] = index of elements[i]*elements[j]."""
    n = len(elements)
    for row in table:
        if len(row) != n or any(not (0 <= x < n) for x in row):
            raise InvalidArgumentError("inconsistent multiplication table")
    return GroupSpec("table", elements, generators, lambda i, j: table[i][j], True)


def build_group(descriptor: str) -> GroupSpec:
    """Parse a textual group descriptor: ``cyclic:m``, ``product:m1,m2,...``,
    ``zbox:d:radius`` or ``free:n:radius``."""
    parts = descriptor.split(":")
    kind = parts[0]
    try:
        if kind == "cyclic":
            return cyclic_group(int(parts[1]))
        if kind == "product":
            return product_of_cyclics(tuple(int(x) for x in parts[1].split(",")))
        if kind == "zbox":
            return zd_box(int(parts[1]), int(parts[2]))
        if kind == "free":
            return free_group_ball(int(parts[1]), int(parts[2]))
    except (IndexError, ValueError) as exc:
        raise InvalidArgumentError(f"bad group descriptor {descriptor!r}: {exc}") from exc
    raise InvalidArgumentError(f"unknown group kind {kind!r}")


@dataclass(frozen=True)
class CayleyTemplate:
    """Base graph plus anchor vertices v_i for i in {-n..-1, 1..n}."""

    base: FiniteGraph
    anchors: dict[int, int]
    anchor_assignment: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        keys = set(self.anchors)
        pos = sorted(k for k in keys if k > 0)
        n = len(pos)
        if n == 0 or keys != set(range(1, n + 1)) | set(range(-n, 0)):
            raise InvalidArgumentError(
                "anchor indices must be exactly {-n..-1, 1..n} for some n >= 1"
            )
        for v in self.anchors.values():
            if not (0 <= v < self.base.vertex_count):
                raise InvalidArgumentError(f"anchor vertex {v} not in base graph")

    @property
    def n_generators(self) -> int:
        return sum(1 for k in self.anchors if k > 0)

    def anchor_vertices(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.anchors.values())))


class CayleyGraph:
    """Finite realization of the fibered graph: vertex (v, g) gets the dense
    index g * |V(base)| + v."""

    def __init__(self, graph, template, group, fiber, base_vertex):
        self.graph = graph
        self.template = template
        self.group = group
        self.fiber = fiber  # vertex -> group element index
        self.base_vertex = base_vertex  # vertex -> base graph vertex
        self.n_base = template.base.vertex_count
        self.boundary_fibers = frozenset(
            g for g in range(group.size) if not group.interior[g]
        )

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    def vertex_index(self, v: int, g: int) -> int:
        return g * self.n_base + v

    def fiber_vertices(self, g: int) -> range:
        return range(g * self.n_base, (g + 1) * self.n_base)

    def interior_fibers(self) -> tuple[int, ...]:
        return tuple(g for g in range(self.group.size) if g not in self.boundary_fibers)


def build_cayley_graph(
    template: CayleyTemplate,
    group: GroupSpec,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> CayleyGraph:
    n = template.n_generators
    if n != len(group.generators):
        raise InvalidArgumentError(
            f"template has {n} anchor pairs but group has "
            f"{len(group.generators)} generators"
        )
    nb = template.base.vertex_count
    total = nb * group.size
    if total > vertex_cap:
        raise TooLargeError(f"Cayley graph would have {total} vertices")
    edges: set[tuple[int, int]] = set()
    for g in range(group.size):
        off = g * nb
        for u, v in template.base.edges:
            edges.add((off + u, off + v))
    for g in range(group.size):
        for i in range(1, n + 1):
            h = group.mul(g, group.generator_indices[i - 1])
            if h is None:
                continue
            a = g * nb + template.anchors[-i]
            b = h * nb + template.anchors[i]
            if a == b:
                # an edge is a 2-element set; the degenerate pair is no edge
                continue
            edges.add((min(a, b), max(a, b)))
    labels = {
        g * nb + v: (v, group.elements[g])
        for g in range(group.size)
        for v in range(nb)
    }
    graph = FiniteGraph(total, tuple(sorted(edges)), labels)
    fiber = tuple(idx // nb for idx in range(total))
    base_vertex = tuple(idx % nb for idx in range(total))
    return CayleyGraph(graph, template, group, fiber, base_vertex)


def require_finite(group: GroupSpec, what: str):
    if not group.finite:
        raise UnsupportedError(f"{what} requires a finite group")


def to_json(cg: CayleyGraph) -> str:
    return json.dumps(
        {
            "group": {"kind": cg.group.kind, "size": cg.group.size},
            "fibers": cg.group.size,
            "vertex_labels": [
                [cg.base_vertex[i], repr(cg.group.elements[cg.fiber[i]])]
                for i in range(cg.vertex_count)
            ],
            "edges": [list(e) for e in cg.graph.edges],
        }
    )
