"""Reader and writer for automorphism declaration files (``.aut``).

Example::

    group { free a b; abelian 2 }
    map a -> a b
    map b -> a
    matrix g1 = [[2,1],[1,1]]
    conj g1 = a
    inverse {
      map a -> b
      map b -> B a
      matrix g1 = [[1,-1],[-1,2]]
      conj g1 = B
    }

Omitted matrices and conjugators default to the identity.
"""

from __future__ import annotations

from pathlib import Path

from polexp.automorphism import Automorphism
from polexp.errors import InvalidAutomorphism, ParseError, PolexpError
from polexp.intmat import identity_matrix
from polexp.syntax import (
    _ASSIGN,
    _MAP,
    Statement,
    format_word,
    parse_group_block,
    parse_matrix,
    split_statements,
    word_at,
)
from polexp.words import IDENTITY


def _parse_maps(stmts, i, spec, closing):
    maps, mats, conj = {}, {}, {}
    names = {n: k for k, n in enumerate(spec.free_names)}
    while i < len(stmts) and stmts[i].text not in closing:
        st = stmts[i]
        m = _MAP.match(st.text)
        a = _ASSIGN.match(st.text)
        if m:
            name = m.group(1)
            if name not in names:
                raise st.error(f"unknown generator {name!r}")
            if name in maps:
                raise st.error(f"generator {name!r} mapped twice")
            maps[name] = word_at(st, m.group(2), spec)
        elif a:
            j = int(a.group(2))
            if not 1 <= j <= spec.num_factors:
                raise st.error(f"no abelian factor g{j}")
            if a.group(1) == "matrix":
                try:
                    mat = parse_matrix(a.group(3))
                except ParseError as exc:
                    raise st.error(exc.bare_message)
                if len(mat) != spec.rank(j):
                    raise st.error(f"g{j} has rank {spec.rank(j)}")
                mats[j] = mat
            else:
                conj[j] = word_at(st, a.group(3), spec)
        else:
            break
        i += 1
    missing = [n for n in spec.free_names if n not in maps]
    return maps, mats, conj, missing, i


def _assemble(spec, maps, mats, conj):
    free = tuple(maps[n] for n in spec.free_names)
    matrices = tuple(mats.get(j, identity_matrix(spec.rank(j))) for j in range(1, spec.num_factors + 1))
    conjs = tuple(conj.get(j, IDENTITY) for j in range(1, spec.num_factors + 1))
    return free, matrices, conjs


def parse_automorphism(text: str, source: str | None = None) -> Automorphism:
    stmts = split_statements(text, source)
    if len(stmts) < 2 or stmts[0].text != "group" or stmts[1].text != "{":
        first = stmts[0] if stmts else Statement("", 1, 1, source)
        raise first.error("file must start with a group block")
    spec, i = parse_group_block(stmts, 2)
    maps, mats, conj, missing, i = _parse_maps(stmts, i, spec, {"inverse"})
    if missing:
        raise ParseError(f"no image given for {', '.join(missing)}", None, None, source)
    if i >= len(stmts) or stmts[i].text != "inverse":
        where = stmts[i] if i < len(stmts) else stmts[-1]
        raise where.error("expected an inverse block")
    if i + 1 >= len(stmts) or stmts[i + 1].text != "{":
        raise stmts[i].error("expected '{' after inverse")
    imaps, imats, iconj, imissing, j = _parse_maps(stmts, i + 2, spec, {"}"})
    if j >= len(stmts) or stmts[j].text != "}":
        where = stmts[j] if j < len(stmts) else stmts[-1]
        raise where.error("unexpected statement in inverse block")
    if imissing:
        raise stmts[i].error(f"inverse gives no image for {', '.join(imissing)}")
    if j + 1 < len(stmts):
        raise stmts[j + 1].error("trailing statement after inverse block")
    try:
        return Automorphism(spec, *_assemble(spec, maps, mats, conj), *_assemble(spec, imaps, imats, iconj))
    except InvalidAutomorphism:
        raise
    except PolexpError as exc:
        raise InvalidAutomorphism(str(exc)) from exc


def load_automorphism(path) -> Automorphism:
    path = Path(path)
    return parse_automorphism(path.read_text(), str(path))


def format_automorphism(phi: Automorphism) -> str:
    spec = phi.spec

    def body(free, mats, conj, indent):
        lines = [f"{indent}map {n} -> {format_word(w, spec)}" for n, w in zip(spec.free_names, free)]
        for j, (m, w) in enumerate(zip(mats, conj), start=1):
            rows = ",".join("[" + ",".join(str(c) for c in r) + "]" for r in m)
            lines.append(f"{indent}matrix g{j} = [{rows}]")
            if w:
                lines.append(f"{indent}conj g{j} = {format_word(w, spec)}")
        return lines

    head = []
    if spec.free_rank:
        head.append("free " + " ".join(spec.free_names))
    if spec.abelian_ranks:
        head.append("abelian " + " ".join(str(k) for k in spec.abelian_ranks))
    out = ["group { " + "; ".join(head) + " }"]
    out += body(phi.free_images, phi.factor_matrices, phi.factor_conjugators, "")
    out.append("inverse {")
    out += body(phi.inverse_free_images, phi.inverse_factor_matrices, phi.inverse_factor_conjugators, "  ")
    out.append("}")
    return "\n".join(out) + "\n"
