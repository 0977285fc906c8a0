"""Reader for CT declaration files (``.ct``).

Example (the golden-ratio map on a rose)::

    vertex v
    edge a : v -> v height 1
    edge b : v -> v height 1
    image a -> a · b
    image b -> a
    circuit ab = a b
    automorphism fib.aut

Other statements: ``group { abelian 2 }`` declares factor ranks, ``vertex w
fat g1`` puts factor 1 at w, ``matrix g1 = [[..]]``, ``map v -> w`` (vertex
images default to those forced by the edge images), ``inp NAME = PATH``,
``exceptional NAME = (e, e', w, d, d')``, ``connecting NAME = PATH -> IMAGE``
and ``component_spectrum g1 = {(d, lambda), ...}``.

Paths are edge names (upper case or ``^-1`` for the reverse, ``^n`` for
powers) and group elements ``g<j>[..]`` at the fat vertex of factor j.
``·`` or ``|`` marks the cut points of a splitting; an image with no marks
is split greedily and verified.  ``@v`` anchors a path with no edges at v.
"""

from __future__ import annotations

import re
from pathlib import Path

from polexp.ct import (
    Circuit,
    CtGraph,
    CtMap,
    Edge,
    ExceptionalTemplate,
    GraphPath,
    SplitCircuit,
    SplitPath,
    Term,
    Vertex,
    close_path,
    infer_vertex_map,
    vadd,
)
from polexp.errors import InconsistentPath, ParseError, PolexpError
from polexp.growth import GrowthType
from polexp.intmat import identity_matrix
from polexp.syntax import Statement, parse_group_block, parse_int_list, parse_matrix, split_statements

_VERTEX = re.compile(r"vertex\s+(\w+)(?:\s+fat\s+g(\d+))?$")
_EDGE = re.compile(r"edge\s+(\w+)\s*:\s*(\w+)\s*->\s*(\w+)\s+height\s+(-?\d+)$")
_NAMED = re.compile(r"(image|inp|exceptional|connecting|circuit|map|matrix|component_spectrum)\s+(\S+)\s*(?:->|=)\s*(.*)$")
_AUT = re.compile(r"automorphism\s+\"?([^\"]+?)\"?$")
_PAIR = re.compile(r"\(\s*(\d+)\s*,\s*([0-9.eE+-]+)\s*\)")


class CtDeclaration:
    """A parsed file: the validated map plus the bundled automorphism path, if any."""

    def __init__(self, ct: CtMap, automorphism_path: Path | None, source: str | None):
        self.ct = ct
        self.automorphism_path = automorphism_path
        self.source = source


class _PathReader:
    TOKEN = re.compile(
        r"\s*(?:(?P<split>[|·])|@(?P<anchor>\w+)|g(?P<fac>\d+)\[(?P<vec>[^\]]*)\](?:\^(?P<gpow>-?\d+))?"
        r"|(?P<one>1)(?![\w\[])|(?P<word>[A-Za-z_][A-Za-z_0-9]*))"
    )

    def __init__(self, graph: CtGraph):
        self.graph = graph
        self.vertex_ids = {v.name: i for i, v in enumerate(graph.vertices)}
        table = {}
        for i, e in enumerate(graph.edges, start=1):
            table[e.name] = i
        for i, e in enumerate(graph.edges, start=1):
            up = e.name.upper() if e.name.islower() else None
            if up and up not in table:
                table[up] = -i
        self.table = table
        self.names = sorted(table, key=len, reverse=True)

    def read(self, st: Statement, text: str):
        """Return (path, cut positions as edge counts)."""
        col0 = st.column + max(st.text.find(text), 0)

        def err(msg, pos):
            return ParseError(msg, st.line, col0 + pos, st.source)

        items = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = self.TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise err(f"unexpected input {text[pos:pos + 8].strip()!r}", pos)
            start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
            if m.group("split"):
                items.append(("split", None, start))
                pos = m.end()
            elif m.group("anchor"):
                name = m.group("anchor")
                if name not in self.vertex_ids:
                    raise err(f"unknown vertex {name!r}", start)
                items.append(("anchor", self.vertex_ids[name], start))
                pos = m.end()
            elif m.group("fac"):
                k = int(m.group("gpow") or 1)
                vec = parse_int_list(m.group("vec"))
                items.append(("elem", (int(m.group("fac")), tuple(k * c for c in vec)), start))
                pos = m.end()
            elif m.group("one"):
                pos = m.end()
            else:
                # longest edge spelling at this position, then an optional ^-1 / ^n
                hit = next((n for n in self.names if text.startswith(n, start)), None)
                if hit is None:
                    raise err(f"unknown edge {m.group('word')!r}", start)
                pos = start + len(hit)
                power = 1
                pm = re.match(r"\^(-?\d+)", text[pos:])
                if pm:
                    power = int(pm.group(1))
                    pos += pm.end()
                oe = self.table[hit] * (1 if power >= 0 else -1)
                items.extend([("edge", oe, start)] * abs(power))
        return self._build(items, err)

    def _build(self, items, err):
        graph = self.graph
        anchor = next((x for k, x, _ in items if k == "anchor"), None)
        first_edge = next((x for k, x, _ in items if k == "edge"), None)
        if anchor is not None:
            v = anchor
        elif first_edge is not None:
            v = graph.origin(first_edge)
        else:
            facs = [x[0] for k, x, _ in items if k == "elem"]
            if not facs:
                raise err("empty path", 0)
            try:
                v = graph.vertex_of_factor(facs[0])
            except KeyError:
                raise err(f"no vertex carries g{facs[0]}", 0)
        start = v
        edges, elems, cuts = [], [graph.zero_at(v)], []
        for kind, x, pos in items:
            if kind == "anchor":
                continue
            if kind == "split":
                if not edges or (cuts and cuts[-1] == len(edges)):
                    raise err("misplaced splitting mark", pos)
                cuts.append(len(edges))
            elif kind == "elem":
                j, vec = x
                if graph.vertices[v].factor != j:
                    raise err(f"g{j} does not live at vertex {graph.vertices[v].name}", pos)
                if len(vec) != graph.rank_at(v):
                    raise err(f"g{j} has rank {graph.rank_at(v)}", pos)
                elems[-1] = vadd(elems[-1], vec)
            else:
                if graph.origin(x) != v:
                    raise err(f"edge {graph.edge_name(x)} does not start at "
                              f"{graph.vertices[v].name}", pos)
                edges.append(x)
                v = graph.terminus(x)
                elems.append(graph.zero_at(v))
        if cuts and cuts[-1] == len(edges):
            raise err("splitting mark at the end of the path", len(items))
        return GraphPath(start, v, tuple(edges), tuple(elems)), cuts


def _recognize(ct: CtMap, path: GraphPath, lo: int, hi: int) -> Term | None:
    edges, inner = path.edges, path.elems[1:]
    for n, t in ct._match_at(edges[:hi], inner, lo):
        if n == hi - lo and t.kind != "edge":
            return t
    if hi - lo == 1:
        return Term("edge", edges[lo])
    return None


def _split_from_cuts(ct: CtMap, path: GraphPath, cuts, st: Statement) -> SplitPath:
    if not cuts:
        return ct.greedy_split(path)
    bounds = [0] + list(cuts) + [len(path.edges)]
    terms, turns = [], []
    for lo, hi in zip(bounds, bounds[1:]):
        t = _recognize(ct, path, lo, hi)
        if t is None:
            raise st.error("a piece of the splitting is not an edge, INP, exceptional or connecting path")
        terms.append(t)
    for c in cuts:
        turns.append(path.elems[c])
    return SplitPath(path.start, path.end, path.head, tuple(terms), tuple(turns), path.tail)


def parse_ct(text: str, source: str | None = None, base_dir: Path | None = None) -> CtDeclaration:
    stmts = split_statements(text, source)
    ranks: tuple[int, ...] = ()
    vertices, edges = [], []
    named: dict[str, list] = {}
    aut_path = None
    i = 0
    while i < len(stmts):
        st = stmts[i]
        if st.text == "group":
            if i + 1 >= len(stmts) or stmts[i + 1].text != "{":
                raise st.error("expected '{' after group")
            spec_like, i = _parse_ranks(stmts, i + 2)
            ranks = spec_like
            continue
        m = _VERTEX.match(st.text)
        if m:
            vertices.append((m.group(1), int(m.group(2)) if m.group(2) else None, st))
            i += 1
            continue
        m = _EDGE.match(st.text)
        if m:
            edges.append((m.group(1), m.group(2), m.group(3), int(m.group(4)), st))
            i += 1
            continue
        m = _AUT.match(st.text)
        if m and st.text.startswith("automorphism"):
            aut_path = Path(m.group(1).strip())
            if base_dir is not None and not aut_path.is_absolute():
                aut_path = base_dir / aut_path
            i += 1
            continue
        m = _NAMED.match(st.text)
        if m:
            named.setdefault(m.group(1), []).append((m.group(2), m.group(3), st))
            i += 1
            continue
        raise st.error(f"cannot parse statement {st.text!r}")

    vids = {}
    for name, fac, st in vertices:
        if name in vids:
            raise st.error(f"vertex {name} declared twice")
        vids[name] = len(vids)
    edge_objs = []
    seen = set()
    for name, o, t, h, st in edges:
        if name in seen or name in vids:
            raise st.error(f"name {name} already used")
        if re.fullmatch(r"g\d+", name):
            raise st.error("edge names of the form g<j> are reserved")
        for x in (o, t):
            if x not in vids:
                raise st.error(f"unknown vertex {x!r}")
        seen.add(name)
        edge_objs.append(Edge(name, vids[o], vids[t], h))
    if not edge_objs:
        raise ParseError("no edges declared", None, None, source)
    try:
        graph = CtGraph(tuple(Vertex(n, f) for n, f, _ in vertices), tuple(edge_objs), ranks)
    except InconsistentPath as exc:
        raise ParseError(str(exc), None, None, source)
    reader = _PathReader(graph)

    def path_of(st, text):
        try:
            return reader.read(st, text)
        except InconsistentPath as exc:
            raise st.error(str(exc))

    matrices = {j: identity_matrix(k) for j, k in enumerate(ranks, start=1)}
    for name, value, st in named.get("matrix", []):
        j = _factor_name(name, st, ranks)
        try:
            a = parse_matrix(value)
        except ParseError as exc:
            raise st.error(exc.bare_message)
        matrices[j] = a
    comp = {}
    for name, value, st in named.get("component_spectrum", []):
        j = _factor_name(name, st, ranks)
        pairs = _PAIR.findall(value)
        if not pairs:
            raise st.error("expected {(d, lambda), ...}")
        comp[j] = [GrowthType(int(d), float(lam)) for d, lam in pairs]
    declared_vm = {}
    for name, value, st in named.get("map", []):
        value = value.strip()
        if name not in vids or value not in vids:
            raise st.error("map needs two declared vertices")
        declared_vm[vids[name]] = vids[value]

    inps = {}
    for name, value, st in named.get("inp", []):
        p, cuts = path_of(st, value)
        if cuts:
            raise st.error("an INP is a single term")
        inps[name] = p
    exc = {}
    for name, value, st in named.get("exceptional", []):
        exc[name] = _parse_exceptional(name, value, st, reader, graph)
    skeleton = CtMap(graph, tuple(range(len(graph.vertices))), matrices, (), inps, exc, {})
    connecting = {}
    for name, value, st in named.get("connecting", []):
        if "->" not in value:
            raise st.error("connecting path needs '-> image'")
        left, right = value.split("->", 1)
        p, cuts = path_of(st, left)
        if cuts:
            raise st.error("a connecting path is a single term")
        img, icuts = path_of(st, right)
        connecting[name] = (p, _split_from_cuts(skeleton, img, icuts, st))
    skeleton = CtMap(graph, skeleton.vertex_map, matrices, (), inps, exc, connecting)

    images: list = [None] * len(edge_objs)
    for name, value, st in named.get("image", []):
        oe = reader.table.get(name)
        if oe is None or oe < 0:
            raise st.error(f"unknown edge {name!r}")
        if images[oe - 1] is not None:
            raise st.error(f"image of {name} given twice")
        p, cuts = path_of(st, value)
        images[oe - 1] = (p, cuts, st)
    missing = [edge_objs[k].name for k, x in enumerate(images) if x is None]
    if missing:
        raise ParseError(f"no image given for {', '.join(missing)}", None, None, source)
    try:
        vm = infer_vertex_map(graph, [p for p, _, _ in images], declared_vm)
    except InconsistentPath as exc:
        raise ParseError(str(exc), None, None, source)
    skeleton = CtMap(graph, vm, matrices, (), inps, exc, connecting)
    splits = tuple(_split_from_cuts(skeleton, p, cuts, st) for p, cuts, st in images)

    circuits = {}
    ct = CtMap(graph, vm, matrices, splits, inps, exc, connecting, comp, {},
               name=Path(source).stem if source else "")
    for name, value, st in named.get("circuit", []):
        p, cuts = path_of(st, value)
        if p.start != p.end:
            raise st.error(f"circuit {name} is not closed")
        if name in circuits:
            raise st.error(f"circuit {name} declared twice")
        circuits[name] = (close_path(graph, p), _circuit_split(ct, p, cuts, st) if cuts else None)
    ct = CtMap(graph, vm, matrices, splits, inps, exc, connecting, comp, circuits, name=ct.name)
    try:
        ct.validate()
    except PolexpError as exc:
        raise type(exc)(f"{source or 'ct'}: {exc}") from exc
    return CtDeclaration(ct, aut_path, source)


def _circuit_split(ct: CtMap, p: GraphPath, cuts, st) -> SplitCircuit:
    """Cuts of a closed path; the base point is always a cut."""
    bounds = [0] + list(cuts) + [len(p.edges)]
    terms = []
    for lo, hi in zip(bounds, bounds[1:]):
        t = _recognize(ct, p, lo, hi)
        if t is None:
            raise st.error("a piece of the circuit splitting is not a declared term")
        terms.append(t)
    turns = [p.elems[c] for c in cuts] + [vadd(p.elems[-1], p.elems[0])]
    return SplitCircuit(tuple(terms), tuple(turns))


def _factor_name(name, st, ranks) -> int:
    m = re.fullmatch(r"g(\d+)", name)
    if not m or not 1 <= int(m.group(1)) <= len(ranks):
        raise st.error(f"no abelian factor {name!r}")
    return int(m.group(1))


def _parse_ranks(stmts, i):
    spec, i = parse_group_block(stmts, i)
    if spec.free_rank:
        raise stmts[i - 1].error("a CT group block only declares abelian ranks")
    return spec.abelian_ranks, i


def _parse_exceptional(name, value, st, reader, graph) -> ExceptionalTemplate:
    m = re.fullmatch(r"\(\s*(\w+)\s*,\s*(\w+)\s*,\s*(.+?)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)", value.strip())
    if not m:
        raise st.error("expected (e, e', w, d, d')")
    es = []
    for x in (m.group(1), m.group(2)):
        oe = reader.table.get(x)
        if oe is None or oe < 0:
            raise st.error(f"unknown edge {x!r}")
        es.append(oe)
    w, cuts = reader.read(st, m.group(3))
    if not w.edges:
        raise st.error("the twisting loop needs at least one edge")
    if cuts:
        raise st.error("the twisting loop is a single path")
    w = GraphPath(w.start, w.end, w.edges, (graph.zero_at(w.start),) + w.interior + (graph.zero_at(w.end),))
    return ExceptionalTemplate(name, es[0], es[1], w, int(m.group(4)), int(m.group(5)))


def load_ct(path) -> CtDeclaration:
    path = Path(path)
    return parse_ct(path.read_text(), str(path), path.parent)


def format_path(graph: CtGraph, path: GraphPath) -> str:
    out = []
    if any(path.head):
        out.append(_elem(graph, path.start, path.head))
    v = path.start
    for e, g in zip(path.edges, path.elems[1:]):
        out.append(graph.edge_name(e))
        v = graph.terminus(e)
        if any(g):
            out.append(_elem(graph, v, g))
    if not path.edges and not out:
        return f"@{graph.vertices[path.start].name}"
    return " ".join(out)


def format_circuit(graph: CtGraph, c: Circuit) -> str:
    if not c.edges:
        if any(c.elems[0]):
            return _elem(graph, c.base, c.elems[0])
        return f"@{graph.vertices[c.base].name}"
    out = []
    for e, g in zip(c.edges, c.elems):
        out.append(graph.edge_name(e))
        if any(g):
            out.append(_elem(graph, graph.terminus(e), g))
    return " ".join(out)


def format_term(ct: CtMap, t: Term) -> str:
    if t.kind == "edge":
        return ct.graph.edge_name(t.ident)
    suffix = "^-1" if t.rev else ""
    if t.kind == "exc":
        return f"{t.ident}[p={t.power}]{suffix}"
    return f"{t.ident}{suffix}"


def _elem(graph: CtGraph, v: int, g) -> str:
    return f"g{graph.vertices[v].factor}[{','.join(str(c) for c in g)}]"
