"""Graph-of-groups paths and growth types for completely split train track maps.

Oriented edges are non-zero integers: ``+i`` is the i-th declared edge
(1-based) and ``-i`` its reverse.  Group elements at a fat vertex are integer
vectors in that vertex's factor; plain vertices carry the empty tuple.

A :class:`CtMap` bundles the graph, the map on vertices and edges, the
declared complete splittings of the edge images and the declared INPs,
exceptional templates and connecting paths.  Splittings are verified, never
discovered; the growth table is assigned bottom-up over the filtration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import ceil, gcd
from typing import Sequence

from polexp.abelian import affine_orbit_growth, orbit_growth
from polexp.algebraic import perron_root, root_polynomial
from polexp.errors import (
    InconsistentPath,
    LengthBudgetExceeded,
    NotCompletelySplit,
    PeriodNotFound,
    StrataInvalid,
)
from polexp.growth import LAMBDA_TOL, ONE, GrowthType, gmax
from polexp.intmat import det, mat_pow, mat_vec

K_CHECK = 6
K_SPLIT = 8
DEFAULT_PATH_BUDGET = 2_000_000

Vec = tuple


def vadd(x: Vec, y: Vec) -> Vec:
    return tuple(a + b for a, b in zip(x, y))


def vneg(x: Vec) -> Vec:
    return tuple(-a for a in x)


def vnorm(x: Vec) -> int:
    return sum(abs(a) for a in x)


# graph --------------------------------------------------------------------

@dataclass(frozen=True)
class Vertex:
    name: str
    factor: int | None = None


@dataclass(frozen=True)
class Edge:
    name: str
    origin: int
    terminus: int
    height: int


@dataclass(frozen=True)
class CtGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    factor_ranks: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "factor_ranks", tuple(self.factor_ranks))
        nv = len(self.vertices)
        if nv == 0:
            raise InconsistentPath("graph has no vertices")
        seen = {}
        for i, v in enumerate(self.vertices):
            if v.factor is not None:
                if not 1 <= v.factor <= len(self.factor_ranks):
                    raise InconsistentPath(f"vertex {v.name} uses undeclared factor g{v.factor}")
                if v.factor in seen:
                    raise InconsistentPath(f"factor g{v.factor} sits at two vertices")
                seen[v.factor] = i
        for e in self.edges:
            if not (0 <= e.origin < nv and 0 <= e.terminus < nv):
                raise InconsistentPath(f"edge {e.name} has an endpoint outside the graph")

    def edge(self, oe: int) -> Edge:
        return self.edges[abs(oe) - 1]

    def origin(self, oe: int) -> int:
        e = self.edges[abs(oe) - 1]
        return e.origin if oe > 0 else e.terminus

    def terminus(self, oe: int) -> int:
        e = self.edges[abs(oe) - 1]
        return e.terminus if oe > 0 else e.origin

    def rank_at(self, v: int) -> int:
        f = self.vertices[v].factor
        return 0 if f is None else self.factor_ranks[f - 1]

    def zero_at(self, v: int) -> Vec:
        return (0,) * self.rank_at(v)

    def is_fat(self, v: int) -> bool:
        return self.vertices[v].factor is not None

    def vertex_of_factor(self, j: int) -> int:
        for i, v in enumerate(self.vertices):
            if v.factor == j:
                return i
        raise KeyError(j)

    def edge_name(self, oe: int) -> str:
        name = self.edge(oe).name
        if oe > 0:
            return name
        up = name.upper() if name.islower() else None
        return up if up and up not in {e.name for e in self.edges} else f"{name}^-1"

    @cached_property
    def heights(self) -> tuple[int, ...]:
        return tuple(sorted({e.height for e in self.edges}))

    def stratum_edges(self, h: int) -> tuple[int, ...]:
        return tuple(i + 1 for i, e in enumerate(self.edges) if e.height == h)


# paths --------------------------------------------------------------------

@dataclass(frozen=True)
class GraphPath:
    """``g0 e1 g1 ... ep gp``; ``elems`` has one more entry than ``edges``."""

    start: int
    end: int
    edges: tuple[int, ...]
    elems: tuple[Vec, ...]

    def __len__(self):
        return len(self.edges)

    @property
    def head(self) -> Vec:
        return self.elems[0]

    @property
    def tail(self) -> Vec:
        return self.elems[-1]

    @property
    def interior(self) -> tuple[Vec, ...]:
        return self.elems[1:-1]

    def equivalent(self, other: GraphPath) -> bool:
        """Equal up to the boundary group elements."""
        return (self.start, self.end, self.edges, self.interior) == (
            other.start, other.end, other.edges, other.interior)


@dataclass(frozen=True)
class Circuit:
    """A closed path read cyclically: ``elems[i]`` follows ``edges[i]``.

    With no edges, ``elems`` is a single element at ``base``.
    """

    base: int
    edges: tuple[int, ...]
    elems: tuple[Vec, ...]

    def __len__(self):
        return len(self.edges)


def make_path(graph: CtGraph, start: int, edges: Sequence[int], elems: Sequence[Vec] | None = None,
              ) -> GraphPath:
    edges = tuple(edges)
    v = start
    verts = [v]
    for e in edges:
        if not 1 <= abs(e) <= len(graph.edges):
            raise InconsistentPath(f"no edge {e}")
        if graph.origin(e) != v:
            raise InconsistentPath(
                f"edge {graph.edge_name(e)} starts at {graph.vertices[graph.origin(e)].name}, "
                f"not {graph.vertices[v].name}")
        v = graph.terminus(e)
        verts.append(v)
    if elems is None:
        elems = tuple(graph.zero_at(u) for u in verts)
    else:
        elems = tuple(tuple(g) for g in elems)
        if len(elems) != len(verts):
            raise InconsistentPath("need one group element per vertex of the path")
        for u, g in zip(verts, elems):
            if len(g) != graph.rank_at(u):
                raise InconsistentPath(
                    f"element {list(g)} does not live at vertex {graph.vertices[u].name}")
    return GraphPath(start, v, edges, elems)


def trivial_path(graph: CtGraph, v: int, g: Vec | None = None) -> GraphPath:
    return GraphPath(v, v, (), (graph.zero_at(v) if g is None else tuple(g),))


def tighten(path: GraphPath) -> GraphPath:
    """Cancel degenerate turns ``e 1 e^-1``, merging the group elements around them."""
    edges: list[int] = []
    elems: list[Vec] = [path.elems[0]]
    for e, g in zip(path.edges, path.elems[1:]):
        if edges and edges[-1] == -e and not any(elems[-1]):
            edges.pop()
            elems.pop()
            elems[-1] = vadd(elems[-1], g)
        else:
            edges.append(e)
            elems.append(g)
    return GraphPath(path.start, path.end, tuple(edges), tuple(elems))


def is_tight(path: GraphPath) -> bool:
    return all(not (a == -b and not any(g))
               for a, b, g in zip(path.edges, path.edges[1:], path.elems[1:]))


def reverse_path(path: GraphPath) -> GraphPath:
    return GraphPath(path.end, path.start, tuple(-e for e in reversed(path.edges)),
                     tuple(vneg(g) for g in reversed(path.elems)))


def join(graph: CtGraph, *paths: GraphPath) -> GraphPath:
    """Concatenate paths end to start, adding the group elements where they meet (no tightening)."""
    first = paths[0]
    edges = list(first.edges)
    elems = list(first.elems)
    end = first.end
    for p in paths[1:]:
        if p.start != end:
            raise InconsistentPath("paths do not meet")
        elems[-1] = vadd(elems[-1], p.elems[0])
        edges.extend(p.edges)
        elems.extend(p.elems[1:])
        end = p.end
    return GraphPath(first.start, end, tuple(edges), tuple(elems))


def path_length(path: GraphPath) -> int:
    """Edges plus interior group elements; boundary elements do not count."""
    return len(path.edges) + sum(vnorm(g) for g in path.elems[1:-1])


def circuit_length(c: Circuit) -> int:
    return len(c.edges) + sum(vnorm(g) for g in c.elems)


def close_path(graph: CtGraph, path: GraphPath) -> Circuit:
    """View a closed path as a circuit (the two boundary elements merge)."""
    if path.start != path.end:
        raise InconsistentPath("path is not closed")
    if not path.edges:
        return Circuit(path.start, (), (path.elems[0],))
    elems = list(path.elems[1:])
    elems[-1] = vadd(elems[-1], path.elems[0])
    return cyclic_tighten(graph, Circuit(path.start, path.edges, tuple(elems)))


def circuit_as_path(graph: CtGraph, c: Circuit) -> GraphPath:
    """Closed path at the base vertex whose head is trivial and whose tail is the wrap element."""
    if not c.edges:
        return GraphPath(c.base, c.base, (), c.elems)
    return GraphPath(c.base, c.base, c.edges, (graph.zero_at(c.base),) + c.elems)


def cyclic_tighten(graph: CtGraph, c: Circuit) -> Circuit:
    if not c.edges:
        return c
    p = tighten(circuit_as_path(graph, c))
    edges = list(p.edges)
    elems = list(p.elems[1:])
    if edges:
        elems[-1] = vadd(elems[-1], p.elems[0])
    else:
        return Circuit(p.start, (), (p.elems[0],))
    while len(edges) >= 2 and edges[0] == -edges[-1] and not any(elems[-1]):
        if len(edges) == 2:
            v = graph.terminus(edges[0])
            return Circuit(v, (), (elems[0],))
        first = elems[0]
        edges = edges[1:-1]
        elems = elems[1:-1]
        elems[-1] = vadd(elems[-1], first)
    return Circuit(graph.origin(edges[0]), tuple(edges), tuple(elems))


def rotate_circuit(graph: CtGraph, c: Circuit, s: int) -> Circuit:
    """Start the circuit at its s-th edge."""
    if not c.edges:
        return c
    edges = c.edges[s:] + c.edges[:s]
    elems = c.elems[s:] + c.elems[:s]
    return Circuit(graph.origin(edges[0]), edges, elems)


# terms of a splitting -------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """One piece of a complete splitting.

    ``kind`` is ``edge`` (``ident`` an oriented edge), ``inp``, ``exc`` or
    ``conn`` (``ident`` a declared name).  ``rev`` reverses the declared
    orientation and ``power`` is the exponent p of an exceptional path.
    """

    kind: str
    ident: int | str
    rev: bool = False
    power: int = 0

    def key(self):
        return (self.kind, self.ident, self.rev)

    def reversed(self) -> Term:
        if self.kind == "edge":
            return Term("edge", -self.ident)
        return Term(self.kind, self.ident, not self.rev, self.power)


@dataclass(frozen=True)
class SplitPath:
    """``head t1 turn1 t2 ... tm tail`` with every turn element between consecutive terms."""

    start: int
    end: int
    head: Vec
    terms: tuple[Term, ...]
    turns: tuple[Vec, ...]
    tail: Vec


@dataclass(frozen=True)
class SplitCircuit:
    """Terms read cyclically; ``turns[i]`` sits between ``terms[i]`` and ``terms[i+1]``."""

    terms: tuple[Term, ...]
    turns: tuple[Vec, ...]


def reverse_split(sp: SplitPath) -> SplitPath:
    return SplitPath(sp.end, sp.start, vneg(sp.tail), tuple(t.reversed() for t in reversed(sp.terms)),
                     tuple(vneg(g) for g in reversed(sp.turns)), vneg(sp.head))


@dataclass(frozen=True)
class ExceptionalTemplate:
    """``e w^p e'^-1`` between linear edges with f(e) = e w^d and f(e') = e' w^d'."""

    name: str
    e: int
    e2: int
    w: GraphPath
    d: int
    d2: int


@dataclass(frozen=True)
class StratumInfo:
    height: int
    edges: tuple[int, ...]
    kind: str  # "EG", "NEG" or "Zero"
    lam: float = 1.0
    poly: tuple[int, ...] | None = None
    linear: bool = False
    fixed: bool = False
    matrix: tuple[tuple[int, ...], ...] = ()

    def label(self) -> str:
        if self.kind == "EG":
            return f"EG({self.lam:.10g})"
        if self.kind == "NEG":
            return "NEG(fixed)" if self.fixed else ("NEG(linear)" if self.linear else "NEG")
        return "Zero"


@dataclass(frozen=True)
class TermGrowthTable:
    edges: dict
    connecting: dict
    inps: dict
    exceptional: dict
    strata: tuple[StratumInfo, ...]

    def of(self, term: Term) -> GrowthType:
        if term.kind == "edge":
            return self.edges[abs(term.ident)]
        if term.kind == "inp":
            return self.inps[term.ident]
        if term.kind == "exc":
            return self.exceptional[term.ident]
        return self.connecting[term.ident]


def polexp_sum(d: int, lam1: float, lam2: float, tol: float = LAMBDA_TOL) -> GrowthType:
    """Growth of sum_{k<=n} (n-k)^d lam1^k lam2^(n-k)."""
    if d < 0 or lam1 < 1 - 1e-12 or lam2 < 1 - 1e-12:
        raise ValueError("need d >= 0 and lambdas >= 1")
    if abs(lam1 - lam2) <= tol * max(lam1, lam2):
        return GrowthType(d + 1, lam2)
    if lam1 > lam2:
        return GrowthType(0, lam1)
    return GrowthType(d, lam2)


def bump_rule(lam_r: GrowthType, c: GrowthType) -> GrowthType:
    """max((0, lam_r), c), raising the degree when the lambdas coincide."""
    if lam_r.same_lambda(c):
        return GrowthType(c.d + 1, c.lam, c.poly or lam_r.poly)
    return gmax(lam_r, c)


# the map ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CtMap:
    graph: CtGraph
    vertex_map: tuple[int, ...]
    matrices: dict  # factor index -> matrix
    images: tuple[SplitPath, ...]  # declared splitting of f(e_i) for edge i+1
    inps: dict = field(default_factory=dict)  # name -> GraphPath
    exceptional: dict = field(default_factory=dict)  # name -> ExceptionalTemplate
    connecting: dict = field(default_factory=dict)  # name -> (GraphPath, SplitPath)
    component_spectra: dict = field(default_factory=dict)  # factor -> list[GrowthType]
    circuits: dict = field(default_factory=dict)  # name -> (Circuit, SplitCircuit | None)
    name: str = ""

    # basic action -------------------------------------------------------------

    def act(self, v: int, g: Vec) -> Vec:
        """Image of a group element at v, living at f(v)."""
        j = self.graph.vertices[v].factor
        if j is None:
            return self.graph.zero_at(self.vertex_map[v])
        return mat_vec(self.matrices[j], g)

    def matrix_at(self, v: int):
        j = self.graph.vertices[v].factor
        return None if j is None else self.matrices[j]

    @cached_property
    def edge_paths(self) -> tuple[GraphPath, ...]:
        return tuple(self.split_to_path(sp) for sp in self.images)

    def edge_image(self, oe: int) -> GraphPath:
        p = self.edge_paths[abs(oe) - 1]
        return p if oe > 0 else reverse_path(p)

    def f_raw(self, path: GraphPath) -> GraphPath:
        pieces = [trivial_path(self.graph, self.vertex_map[path.start], self.act(path.start, path.elems[0]))]
        for e, g in zip(path.edges, path.elems[1:]):
            pieces.append(self.edge_image(e))
            v = self.graph.terminus(e)
            pieces.append(trivial_path(self.graph, self.vertex_map[v], self.act(v, g)))
        return join(self.graph, *pieces)

    def f_sharp(self, path: GraphPath, budget: int | None = None) -> GraphPath:
        graph = self.graph
        edges: list[int] = []
        elems: list[Vec] = [self.act(path.start, path.elems[0])]
        for e, g in zip(path.edges, path.elems[1:]):
            img = self.edge_image(e)
            elems[-1] = vadd(elems[-1], img.elems[0])
            for e2, g2 in zip(img.edges, img.elems[1:]):
                if edges and edges[-1] == -e2 and not any(elems[-1]):
                    edges.pop()
                    elems.pop()
                    elems[-1] = vadd(elems[-1], g2)
                else:
                    edges.append(e2)
                    elems.append(g2)
            elems[-1] = vadd(elems[-1], self.act(graph.terminus(e), g))
            if budget is not None and len(edges) > budget:
                raise LengthBudgetExceeded(f"path image exceeds {budget} edges")
        return GraphPath(self.vertex_map[path.start], self.vertex_map[path.end], tuple(edges), tuple(elems))

    def f_sharp_circuit(self, c: Circuit, budget: int | None = None) -> Circuit:
        if not c.edges:
            return Circuit(self.vertex_map[c.base], (), (self.act(c.base, c.elems[0]),))
        img = self.f_sharp(circuit_as_path(self.graph, c), budget)
        return close_path(self.graph, img)

    def iterate_path(self, path: GraphPath, n: int, budget: int | None = None) -> GraphPath:
        for _ in range(n):
            path = self.f_sharp(path, budget)
        return path

    def path_lengths(self, path: GraphPath, n_max: int, budget: int = DEFAULT_PATH_BUDGET,
                     truncate: bool = False) -> list[int]:
        """path_length(f_#^n(path)) for n = 0..n_max, by direct iteration."""
        out = [path_length(path)]
        for n in range(1, n_max + 1):
            try:
                path = self.f_sharp(path, budget)
            except LengthBudgetExceeded as exc:
                if truncate:
                    return out
                exc.reached = n - 1
                raise
            out.append(path_length(path))
        return out

    def circuit_lengths(self, c: Circuit, n_max: int, budget: int = DEFAULT_PATH_BUDGET,
                        truncate: bool = False) -> list[int]:
        out = [circuit_length(c)]
        for n in range(1, n_max + 1):
            try:
                c = self.f_sharp_circuit(c, budget)
            except LengthBudgetExceeded as exc:
                if truncate:
                    return out
                exc.reached = n - 1
                raise
            out.append(circuit_length(c))
        return out

    # terms --------------------------------------------------------------------

    def term_path(self, t: Term) -> GraphPath:
        graph = self.graph
        if t.kind == "edge":
            return make_path(graph, graph.origin(t.ident), (t.ident,))
        if t.kind == "inp":
            p = self.inps[t.ident]
        elif t.kind == "conn":
            p = self.connecting[t.ident][0]
        else:
            x = self.exceptional[t.ident]
            w = x.w if t.power >= 0 else reverse_path(x.w)
            e = make_path(graph, graph.origin(x.e), (x.e,))
            e2 = make_path(graph, graph.terminus(x.e2), (-x.e2,))
            p = join(graph, e, *([w] * abs(t.power)), e2)
        p = GraphPath(p.start, p.end, p.edges, (graph.zero_at(p.start),) + p.interior + (graph.zero_at(p.end),))
        return reverse_path(p) if t.rev else p

    def split_to_path(self, sp: SplitPath) -> GraphPath:
        graph = self.graph
        pieces = [trivial_path(graph, sp.start, sp.head)]
        for i, t in enumerate(sp.terms):
            if i:
                pieces.append(trivial_path(graph, pieces[-1].end, sp.turns[i - 1]))
            pieces.append(self.term_path(t))
        pieces.append(trivial_path(graph, sp.end, sp.tail))
        return join(graph, *pieces)

    def split_circuit_to_circuit(self, sc: SplitCircuit) -> Circuit:
        graph = self.graph
        paths = [self.term_path(t) for t in sc.terms]
        edges: list[int] = []
        elems: list[Vec] = []
        for p, turn in zip(paths, sc.turns):
            edges.extend(p.edges)
            elems.extend(p.interior)
            elems.append(turn)
        return Circuit(graph.origin(edges[0]), tuple(edges), tuple(elems))

    def _term_image_uncached(self, t: Term) -> SplitPath:
        if t.rev:
            return reverse_split(self.term_image(t.reversed()))
        if t.kind == "edge":
            sp = self.images[abs(t.ident) - 1]
            return sp if t.ident > 0 else reverse_split(sp)
        if t.kind == "conn":
            return self.connecting[t.ident][1]
        path = self.term_path(t)
        img = self.f_sharp(path)
        if t.kind == "inp":
            if not img.equivalent(path):
                raise StrataInvalid(f"INP {t.ident} is not fixed up to boundary elements")
            return SplitPath(img.start, img.end, img.head, (t,), (), img.tail)
        x = self.exceptional[t.ident]
        q = t.power + x.d - x.d2
        target = self.term_path(Term("exc", t.ident, False, q))
        if not img.equivalent(target):
            raise StrataInvalid(f"exceptional path {t.ident} with exponent {t.power} does not map to exponent {q}")
        return SplitPath(img.start, img.end, img.head, (Term("exc", t.ident, False, q),), (), img.tail)

    def term_image(self, t: Term) -> SplitPath:
        cache = self.__dict__.setdefault("_image_cache", {})
        out = cache.get(t)
        if out is None:
            out = self._term_image_uncached(t)
            cache[t] = out
        return out

    def term_ends(self, t: Term) -> tuple[int, int]:
        p = self.term_path(t)
        return p.start, p.end

    # split evolution ------------------------------------------------------------

    def split_image(self, sp: SplitPath) -> SplitPath:
        terms: list[Term] = []
        turns: list[Vec] = []
        head = None
        prev_tail = None
        prev_end = sp.start
        for i, t in enumerate(sp.terms):
            im = self.term_image(t)
            if i == 0:
                head = vadd(self.act(sp.start, sp.head), im.head)
            else:
                turns.append(vadd(vadd(prev_tail, self.act(prev_end, sp.turns[i - 1])), im.head))
            terms.extend(im.terms)
            turns.extend(im.turns)
            prev_tail = im.tail
            prev_end = self.term_ends(t)[1]
        if not sp.terms:
            g = self.act(sp.start, vadd(sp.head, sp.tail))
            return SplitPath(self.vertex_map[sp.start], self.vertex_map[sp.end], g, (), (), self.graph.zero_at(self.vertex_map[sp.end]))
        tail = vadd(prev_tail, self.act(sp.end, sp.tail))
        return SplitPath(self.vertex_map[sp.start], self.vertex_map[sp.end], head, tuple(terms), tuple(turns), tail)

    def split_circuit_image(self, sc: SplitCircuit) -> SplitCircuit:
        m = len(sc.terms)
        images = [self.term_image(t) for t in sc.terms]
        terms: list[Term] = []
        turns: list[Vec] = []
        for i, (t, im) in enumerate(zip(sc.terms, images)):
            terms.extend(im.terms)
            turns.extend(im.turns)
            nxt = images[(i + 1) % m]
            v = self.term_ends(t)[1]
            turns.append(vadd(vadd(im.tail, self.act(v, sc.turns[i])), nxt.head))
        return SplitCircuit(tuple(terms), tuple(turns))

    def _junctions_ok(self, terms: Sequence[Term], turns: Sequence[Vec], cyclic: bool) -> bool:
        paths = [self.term_path(t) for t in terms]
        m = len(paths)
        pairs = range(m) if cyclic else range(m - 1)
        for i in pairs:
            a, b = paths[i], paths[(i + 1) % m]
            if a.edges and b.edges and a.edges[-1] == -b.edges[0] and not any(turns[i]):
                return False
        return True

    def verify_split(self, sp: SplitPath, k_check: int = K_CHECK) -> bool:
        """No cancellation between term images under f_#^k for k <= k_check."""
        for _ in range(k_check + 1):
            if not self._junctions_ok(sp.terms, sp.turns, False):
                return False
            sp = self.split_image(sp)
        return True

    def verify_split_circuit(self, sc: SplitCircuit, k_check: int = K_CHECK) -> bool:
        for _ in range(k_check + 1):
            if not self._junctions_ok(sc.terms, sc.turns, True):
                return False
            sc = self.split_circuit_image(sc)
        return True

    # greedy splitting ---------------------------------------------------------

    def _match_at(self, edges: Sequence[int], elems: Sequence[Vec], i: int) -> list[tuple[int, Term]]:
        """Terms matching edges[i:], as (number of edges, term); ``elems[j]`` follows ``edges[j]``."""
        out = []

        def fits(p: GraphPath) -> bool:
            n = len(p.edges)
            return (n > 0 and tuple(edges[i:i + n]) == p.edges
                    and tuple(elems[i:i + n - 1]) == p.interior)

        for name in self.connecting:
            for rev in (False, True):
                t = Term("conn", name, rev)
                p = self.term_path(t)
                if fits(p):
                    out.append((len(p.edges), t))
        for name in self.inps:
            for rev in (False, True):
                t = Term("inp", name, rev)
                p = self.term_path(t)
                if fits(p):
                    out.append((len(p.edges), t))
        for name in self.exceptional:
            for rev in (False, True):
                best = None
                for sign in (1, -1):
                    power = 0 if sign == 1 else -1
                    while True:
                        t = Term("exc", name, rev, power)
                        p = self.term_path(t)
                        if len(p.edges) > len(edges) - i:
                            break
                        if fits(p) and (best is None or len(p.edges) > best[0]):
                            best = (len(p.edges), t)
                        power += sign
                if best:
                    out.append(best)
        out.append((1, Term("edge", edges[i])))
        return out

    def greedy_split(self, path: GraphPath) -> SplitPath:
        edges, inner = path.edges, path.elems[1:]
        i = 0
        terms, turns = [], []
        while i < len(edges):
            n, t = max(self._match_at(edges, inner, i), key=lambda c: c[0])
            if terms:
                turns.append(inner[i - 1])
            terms.append(t)
            i += n
        return SplitPath(path.start, path.end, path.head, tuple(terms), tuple(turns), path.tail)

    def split_path(self, path: GraphPath) -> SplitPath:
        sp = self.greedy_split(path)
        if not self.verify_split(sp):
            raise NotCompletelySplit("greedy splitting is not stable under f_#")
        return sp

    def split_circuit(self, c: Circuit) -> SplitCircuit | None:
        """A verified cyclic splitting, trying every rotation; None if none is found."""
        if not c.edges:
            return SplitCircuit((), ())
        for s in range(len(c.edges)):
            r = rotate_circuit(self.graph, c, s)
            lin = GraphPath(r.base, r.base, r.edges, (self.graph.zero_at(r.base),) + r.elems)
            sp = self.greedy_split(lin)
            sc = SplitCircuit(sp.terms, sp.turns + (r.elems[-1],))
            if self.split_circuit_to_circuit(sc) != r:
                continue
            if self.verify_split_circuit(sc):
                return sc
        return None

    # strata ---------------------------------------------------------------------

    def transition_matrix(self, h: int) -> tuple[tuple[int, ...], ...]:
        """M[i][j] = number of crossings of edge i in f(edge j), within stratum h."""
        es = self.graph.stratum_edges(h)
        idx = {e: k for k, e in enumerate(es)}
        m = [[0] * len(es) for _ in es]
        for j, e in enumerate(es):
            for x in self.edge_image(e).edges:
                k = idx.get(abs(x))
                if k is not None:
                    m[k][j] += 1
        return tuple(tuple(r) for r in m)

    @cached_property
    def strata(self) -> tuple[StratumInfo, ...]:
        return tuple(self._classify(h) for h in self.graph.heights)

    def _classify(self, h: int) -> StratumInfo:
        graph = self.graph
        es = graph.stratum_edges(h)
        for e in es:
            for x in self.edge_image(e).edges:
                if graph.edge(x).height > h:
                    raise StrataInvalid(
                        f"image of {graph.edge_name(e)} crosses {graph.edge_name(x)} of greater height")
        m = self.transition_matrix(h)
        if not any(any(r) for r in m):
            for e in es:
                ed = graph.edge(e)
                if graph.is_fat(ed.origin) or graph.is_fat(ed.terminus):
                    raise StrataInvalid(f"zero stratum edge {ed.name} touches a fat vertex")
            return StratumInfo(h, es, "Zero", matrix=m)
        if len(es) == 1 and m == ((1,),):
            e = es[0]
            img = self.edge_image(e)
            if img.edges[0] != e:
                raise StrataInvalid(
                    f"NEG edge {graph.edge_name(e)} must map to g·{graph.edge_name(e)}·u")
            u = GraphPath(graph.terminus(e), img.end, img.edges[1:], img.elems[1:])
            if not u.edges:
                return StratumInfo(h, es, "NEG", fixed=True, matrix=m)
            linear = u.start == u.end and self.f_sharp(u).equivalent(u)
            return StratumInfo(h, es, "NEG", linear=linear, matrix=m)
        if not _irreducible(m):
            raise StrataInvalid(f"transition matrix of stratum {h} is reducible: {[list(r) for r in m]}")
        lam, poly = perron_root(m)
        if lam <= 1 + 1e-9:
            raise StrataInvalid(f"stratum {h} has Perron-Frobenius eigenvalue 1 but is not a single NEG edge")
        return StratumInfo(h, es, "EG", lam=lam, poly=poly, matrix=m)

    def stratum_of(self, e: int) -> StratumInfo:
        h = self.graph.edge(e).height
        return next(s for s in self.strata if s.height == h)

    # validation ---------------------------------------------------------------

    def validate(self) -> None:
        graph = self.graph
        if len(self.vertex_map) != len(graph.vertices):
            raise InconsistentPath("vertex map must list every vertex")
        for v, w in enumerate(self.vertex_map):
            if graph.is_fat(v) and w != v:
                raise StrataInvalid(f"fat vertex {graph.vertices[v].name} must be fixed")
        for j, a in self.matrices.items():
            if len(a) != graph.factor_ranks[j - 1] or abs(det(a)) != 1:
                raise StrataInvalid(f"matrix of g{j} must be {graph.factor_ranks[j - 1]}x"
                                    f"{graph.factor_ranks[j - 1]} with determinant +-1")
        for i, sp in enumerate(self.images, start=1):
            name = graph.edge_name(i)
            p = self.edge_paths[i - 1]
            if not p.edges:
                raise StrataInvalid(f"image of {name} is a trivial path")
            if p.start != self.vertex_map[graph.origin(i)] or p.end != self.vertex_map[graph.terminus(i)]:
                raise StrataInvalid(f"image of {name} does not join the images of its endpoints")
            if not is_tight(p):
                raise StrataInvalid(f"image of {name} is not tight")
        for name, p in self.inps.items():
            if not p.edges or not is_tight(p):
                raise StrataInvalid(f"INP {name} must be a non-trivial tight path")
            self.term_image(Term("inp", name))
        for name, x in self.exceptional.items():
            self._check_exceptional(x)
        for name, (p, sp) in self.connecting.items():
            if self.f_sharp(p) != self.split_to_path(sp):
                raise StrataInvalid(f"declared image of connecting path {name} is not its f_# image")
            if not self.verify_split(sp):
                raise NotCompletelySplit(f"image of connecting path {name} is not completely split")
        self.strata  # raises StrataInvalid
        for i, sp in enumerate(self.images, start=1):
            if not self.verify_split(sp):
                raise NotCompletelySplit(f"declared splitting of f({graph.edge_name(i)}) "
                                         f"cancels under iteration")

    def _check_exceptional(self, x: ExceptionalTemplate) -> None:
        graph = self.graph
        if x.d == x.d2:
            raise StrataInvalid(f"exceptional template {x.name} needs d != d'")
        if x.w.start != x.w.end or not x.w.edges:
            raise StrataInvalid(f"twisting path of {x.name} must be a non-trivial loop")
        for e, d in ((x.e, x.d), (x.e2, x.d2)):
            img = self.edge_image(e)
            w = x.w if d >= 0 else reverse_path(x.w)
            want = join(graph, make_path(graph, graph.origin(e), (e,)), *([w] * abs(d)))
            if not img.equivalent(want):
                raise StrataInvalid(f"f({graph.edge_name(e)}) is not {graph.edge_name(e)}·w^{d} "
                                    f"for template {x.name}")
        for p0 in (0, 1, 3):
            path = self.term_path(Term("exc", x.name, False, p0))
            for k in range(1, K_CHECK + 1):
                path = self.f_sharp(path)
                if not path.equivalent(self.term_path(Term("exc", x.name, False, p0 + k * (x.d - x.d2)))):
                    raise StrataInvalid(f"exceptional path {x.name} drifts incorrectly")

    # growth -------------------------------------------------------------------

    @cached_property
    def vertex_stabilization_power(self) -> int:
        return vertex_stabilization_power(self.vertex_map)

    @property
    def k_per(self) -> int:
        n_terms = len(self.inps) + len(self.exceptional) + len(self.connecting)
        return 2 * (2 * len(self.graph.edges) + 2 * n_terms)

    def turn_growth(self, left: Term, g: Vec, right: Term) -> GrowthType:
        """Growth of the group element at the turn between two terms under iteration."""
        seen: dict = {}
        states = []
        cur = (left, tuple(g), right)
        bound = self.k_per + self.vertex_stabilization_power + 1
        for k in range(bound + 1):
            key = (cur[0].key(), cur[2].key())
            if key in seen:
                k0 = seen[key]
                period = k - k0
                break
            seen[key] = k
            states.append(cur)
            cur = self._turn_step(cur)
        else:
            raise PeriodNotFound(f"no period within {bound} steps for a turn at {left} | {right}")
        l0, x0, r0 = states[k0]
        v = self.term_ends(l0)[1]
        if not self.graph.is_fat(v):
            return ONE
        # translation part of one period, from a zero start
        probe = (l0, self.graph.zero_at(v), r0)
        for _ in range(period):
            probe = self._turn_step(probe)
        a = mat_pow(self.matrix_at(v), period)
        t = affine_orbit_growth(a, probe[1], x0)
        if period == 1 or t.is_polynomial:
            return t
        lam = t.lam ** (1.0 / period)
        poly = root_polynomial(t.poly, period, t.lam) if t.poly else None
        return GrowthType(t.d, lam, poly)

    def _turn_step(self, state):
        left, x, right = state
        v = self.term_ends(left)[1]
        il, ir = self.term_image(left), self.term_image(right)
        return (il.terms[-1], vadd(vadd(il.tail, self.act(v, x)), ir.head), ir.terms[0])

    def _interior_turn_growths(self, sp: SplitPath) -> list[GrowthType]:
        return [self.turn_growth(a, g, b) for a, g, b in zip(sp.terms, sp.turns, sp.terms[1:])]

    @cached_property
    def growth_table(self) -> TermGrowthTable:
        return self.assign_growth_types()

    def assign_growth_types(self) -> TermGrowthTable:
        graph = self.graph
        table: dict[int, GrowthType] = {}
        conn: dict[str, GrowthType] = {}
        inps = {name: ONE for name in self.inps}
        exc = {name: GrowthType(1, 1.0, (1, -1)) for name in self.exceptional}

        def c(t: Term) -> GrowthType:
            if t.kind == "edge":
                return table[abs(t.ident)]
            if t.kind == "inp":
                return inps[t.ident]
            if t.kind == "exc":
                return exc[t.ident]
            return conn[t.ident]

        for s in self.strata:
            own = set(s.edges)
            pool: list[GrowthType] = []
            for e in s.edges:
                sp = self.images[e - 1]
                lower = [t for t in sp.terms if not (t.kind == "edge" and abs(t.ident) in own)]
                if s.kind == "NEG" and any(t.kind == "edge" and abs(t.ident) in own for t in lower):
                    raise StrataInvalid(f"NEG edge {graph.edge_name(e)} appears twice in its image")
                pool.extend(c(t) for t in lower)
                pool.extend(self._interior_turn_growths(sp))
                if s.kind == "Zero":
                    table[e] = gmax(ONE, *pool)
                    pool = []
            if s.kind == "EG":
                value = bump_rule(GrowthType(0, s.lam, s.poly), gmax(*pool)) if pool else GrowthType(0, s.lam, s.poly)
            elif s.kind == "NEG":
                value = bump_rule(ONE, gmax(*pool)) if pool else ONE
            if s.kind != "Zero":
                for e in s.edges:
                    table[e] = value
            for name, (p, sp) in self.connecting.items():
                if max(graph.edge(x).height for x in p.edges) == s.height:
                    conn[name] = gmax(ONE, *(c(t) for t in sp.terms), *self._interior_turn_growths(sp))
        missing = [n for n in self.connecting if n not in conn]
        if missing:
            raise StrataInvalid(f"connecting paths {missing} have no height")
        return TermGrowthTable(table, conn, inps, exc, self.strata)

    def circuit_growth(self, c: Circuit, splitting: SplitCircuit | None = None) -> GrowthType:
        """Predicted growth of circuit_length(f_#^n(c))."""
        table = self.growth_table
        if not c.edges:
            a = self.matrix_at(c.base)
            return ONE if a is None else orbit_growth(a, c.elems[0])
        if splitting is not None:
            if not _is_rotation(self.split_circuit_to_circuit(splitting), c) \
                    or not self.verify_split_circuit(splitting):
                raise NotCompletelySplit("declared circuit splitting does not verify")
            sc = splitting
        else:
            cur = c
            for _ in range(K_SPLIT + 1):
                sc = self.split_circuit(cur)
                if sc is not None:
                    break
                cur = self.f_sharp_circuit(cur)
                if not cur.edges:
                    return self.circuit_growth(cur)
            else:
                raise NotCompletelySplit(f"no completely split image within {K_SPLIT} iterations")
        m = len(sc.terms)
        types = [table.of(t) for t in sc.terms]
        types += [self.turn_growth(sc.terms[i], sc.turns[i], sc.terms[(i + 1) % m]) for i in range(m)]
        return gmax(*types)

    def path_growth(self, path: GraphPath) -> GrowthType:
        """Predicted growth of path_length(f_#^n(path)) for a completely split path."""
        sp = self.split_path(path)
        types = [self.growth_table.of(t) for t in sp.terms] + self._interior_turn_growths(sp)
        return gmax(ONE, *types)

    @property
    def eigenvalues(self) -> list[float]:
        return [s.lam for s in self.strata if s.kind == "EG"]


def _is_rotation(a: Circuit, b: Circuit) -> bool:
    if len(a.edges) != len(b.edges):
        return False
    n = len(a.edges)
    return any(a.edges == b.edges[s:] + b.edges[:s] and a.elems == b.elems[s:] + b.elems[:s]
               for s in range(max(n, 1)))


def _irreducible(m) -> bool:
    n = len(m)
    for s in range(n):
        seen = {s}
        stack = [s]
        while stack:
            i = stack.pop()
            for j in range(n):
                if m[j][i] and j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != n:
            return False
    return True


def vertex_stabilization_power(vertex_map: Sequence[int]) -> int:
    """Least p >= 1 such that f^p(v) is fixed by f^p for every vertex v."""
    cycle_lcm = 1
    depth = 0
    for v in range(len(vertex_map)):
        order = {}
        x, k = v, 0
        while x not in order:
            order[x] = k
            x = vertex_map[x]
            k += 1
        cyc = k - order[x]
        depth = max(depth, order[x])
        cycle_lcm = cycle_lcm * cyc // gcd(cycle_lcm, cyc)
    return max(cycle_lcm, cycle_lcm * ceil(depth / cycle_lcm))


def infer_vertex_map(graph: CtGraph, images: Sequence[GraphPath], declared: dict | None = None) -> tuple[int, ...]:
    vm: list[int | None] = [None] * len(graph.vertices)
    for v, w in (declared or {}).items():
        vm[v] = w
    for i, p in enumerate(images, start=1):
        for v, w in ((graph.origin(i), p.start), (graph.terminus(i), p.end)):
            if vm[v] is None:
                vm[v] = w
            elif vm[v] != w:
                raise InconsistentPath(
                    f"vertex {graph.vertices[v].name} would map to both {graph.vertices[vm[v]].name} "
                    f"and {graph.vertices[w].name}")
    return tuple(v if w is None else w for v, w in enumerate(vm))


# function forms of the CtMap methods --------------------------------------------

def f_sharp(ct: CtMap, path: GraphPath, budget: int | None = None) -> GraphPath:
    return ct.f_sharp(path, budget)


def classify_strata(ct: CtMap) -> tuple[StratumInfo, ...]:
    return ct.strata


def assign_growth_types(ct: CtMap) -> TermGrowthTable:
    return ct.assign_growth_types()


def fat_turn_growth(ct: CtMap, turn: tuple[Term, Vec, Term]) -> GrowthType:
    left, g, right = turn
    return ct.turn_growth(left, g, right)


def circuit_growth(ct: CtMap, circuit: Circuit, splitting: SplitCircuit | None = None) -> GrowthType:
    return ct.circuit_growth(circuit, splitting)
