"""From graph-of-groups paths to words in the fundamental group.

A breadth-first maximal tree from the first vertex is collapsed: every
non-tree edge becomes a free generator (named after the edge, in declaration
order) and the factor at a fat vertex becomes the corresponding abelian
factor.  Loops read as words; circuits read as conjugacy classes.
"""

from __future__ import annotations

from collections import deque
from functools import cached_property

from polexp.automorphism import Automorphism
from polexp.ct import Circuit, CtGraph, CtMap, GraphPath, circuit_as_path, join, make_path, reverse_path
from polexp.errors import SpecMismatch
from polexp.words import AbelianSyllable, FreeLetter, GroupSpec, NormalWord, normalize


class FundamentalGroup:
    def __init__(self, graph: CtGraph):
        self.graph = graph
        parent: dict[int, int | None] = {0: None}
        tree_edges = set()
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for i, e in enumerate(graph.edges, start=1):
                for oe in (i, -i):
                    if graph.origin(oe) == v and graph.terminus(oe) not in parent:
                        parent[graph.terminus(oe)] = oe
                        tree_edges.add(i)
                        queue.append(graph.terminus(oe))
        if len(parent) != len(graph.vertices):
            raise SpecMismatch("the graph is not connected")
        self.parent = parent
        self.tree_edges = frozenset(tree_edges)
        self.generator_edges = tuple(i for i in range(1, len(graph.edges) + 1) if i not in tree_edges)
        self._gen_index = {e: k for k, e in enumerate(self.generator_edges, start=1)}
        names = tuple(graph.edge(e).name for e in self.generator_edges)
        self.spec = GroupSpec(graph.factor_ranks, len(names), names)

    def tree_path(self, v: int) -> GraphPath:
        """The tree path from the base vertex to v."""
        edges = []
        while self.parent[v] is not None:
            oe = self.parent[v]
            edges.append(oe)
            v = self.graph.origin(oe)
        return make_path(self.graph, 0, tuple(reversed(edges)))

    def generator_loop(self, k: int) -> GraphPath:
        e = self.generator_edges[k - 1]
        g = self.graph
        return join(g, self.tree_path(g.origin(e)), make_path(g, g.origin(e), (e,)),
                    reverse_path(self.tree_path(g.terminus(e))))

    def path_word(self, path: GraphPath) -> NormalWord:
        raw = []
        v = path.start
        for k, g in enumerate(path.elems):
            if k:
                e = path.edges[k - 1]
                idx = self._gen_index.get(abs(e))
                if idx is not None:
                    raw.append(FreeLetter(idx, 1 if e > 0 else -1))
                v = self.graph.terminus(e)
            if any(g):
                raw.append(AbelianSyllable(self.graph.vertices[v].factor, tuple(g)))
        return normalize(raw)

    def circuit_word(self, c: Circuit) -> NormalWord:
        return self.path_word(circuit_as_path(self.graph, c))


class InducedMap:
    """The automorphism of the fundamental group induced by a CT map."""

    def __init__(self, ct: CtMap):
        self.ct = ct
        self.group = FundamentalGroup(ct.graph)

    @property
    def spec(self) -> GroupSpec:
        return self.group.spec

    @cached_property
    def free_images(self) -> tuple[NormalWord, ...]:
        fg = self.group
        return tuple(fg.path_word(self.ct.f_sharp(fg.generator_loop(k)))
                     for k in range(1, len(fg.generator_edges) + 1))

    @cached_property
    def factor_conjugators(self) -> tuple[NormalWord, ...]:
        fg = self.group
        g = self.ct.graph
        return tuple(fg.path_word(self.ct.f_sharp(fg.tree_path(g.vertex_of_factor(j))))
                     for j in range(1, len(g.factor_ranks) + 1))

    @property
    def factor_matrices(self):
        return tuple(self.ct.matrices[j] for j in range(1, len(self.ct.graph.factor_ranks) + 1))

    def with_inverse(self, inverse_of: Automorphism) -> Automorphism:
        """Pair the induced forward map with the inverse data of ``inverse_of``.

        ``inverse_of`` must induce the same map on the generators; it is
        typically the automorphism file bundled with the CT file.
        """
        if inverse_of.spec != self.spec or inverse_of.spec.free_names != self.spec.free_names:
            raise SpecMismatch(
                f"automorphism acts on {_describe(inverse_of.spec)} but the CT graph gives "
                f"{_describe(self.spec)}")
        forward = Automorphism(self.spec, self.free_images, self.factor_matrices, self.factor_conjugators,
                               inverse_of.inverse_free_images, inverse_of.inverse_factor_matrices,
                               inverse_of.inverse_factor_conjugators, verify=False)
        for gen in self.spec.generators():
            if forward.apply(gen) != inverse_of.apply(gen):
                raise SpecMismatch("the automorphism file does not match the map induced by the CT")
        return Automorphism(self.spec, self.free_images, self.factor_matrices, self.factor_conjugators,
                            inverse_of.inverse_free_images, inverse_of.inverse_factor_matrices,
                            inverse_of.inverse_factor_conjugators)


def _describe(spec: GroupSpec) -> str:
    parts = []
    if spec.free_rank:
        parts.append("free " + " ".join(spec.free_names))
    if spec.abelian_ranks:
        parts.append("abelian " + " ".join(map(str, spec.abelian_ranks)))
    return "; ".join(parts)
