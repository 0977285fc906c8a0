"""Text syntax shared by the CLI and the declaration files.

Words are whitespace-separated syllables: free generators by name (``a1`` ..
``aN`` always work, plus any names declared in the group block), inverses as
the upper-cased name or ``x^-1``, powers as ``x^n``, and abelian syllables as
``g<j>[c1,...,ck]``.  ``1`` denotes the identity.
"""

from __future__ import annotations

import json
import re

from polexp.errors import ParseError
from polexp.words import AbelianSyllable, FreeLetter, GroupSpec, NormalWord, normalize

_ABELIAN = re.compile(r"g(\d+)\[([^\]]*)\]")
_POWER = re.compile(r"\^(-?\d+)")
_CANONICAL = re.compile(r"([aA])(\d+)")


def _name_table(names) -> dict[str, tuple[int, int]]:
    """Map every accepted spelling to (index, sign)."""
    table = {}
    for i, name in enumerate(names, start=1):
        table[name] = (i, 1)
    for i, name in enumerate(names, start=1):
        up = name.upper() if name.islower() else name.swapcase()
        if up != name and up not in table:
            table[up] = (i, -1)
    return table


class _Lexer:
    def __init__(self, text, line=None, column0=1, source=None):
        self.text = text
        self.pos = 0
        self.line = line
        self.column0 = column0
        self.source = source

    def error(self, message, pos=None):
        pos = self.pos if pos is None else pos
        return ParseError(message, self.line, self.column0 + pos, self.source)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def done(self):
        self.skip_ws()
        return self.pos >= len(self.text)

    def power(self) -> int:
        m = _POWER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return int(m.group(1))
        return 1


def parse_int_list(text, lexer: _Lexer | None = None, pos=0) -> tuple[int, ...]:
    items = [t.strip() for t in text.split(",")] if text.strip() else []
    try:
        return tuple(int(t) for t in items)
    except ValueError:
        if lexer is not None:
            raise lexer.error(f"expected integers, got [{text}]", pos)
        raise ParseError(f"expected integers, got [{text}]")


def parse_word(text: str, spec: GroupSpec, *, line=None, column=1, source=None) -> NormalWord:
    lex = _Lexer(text, line, column, source)
    table = _name_table(spec.free_names)
    names = sorted(table, key=len, reverse=True)
    raw = []
    while not lex.done():
        start = lex.pos
        if text.startswith("1", lex.pos) and (lex.pos + 1 == len(text) or text[lex.pos + 1].isspace()):
            lex.pos += 1
            continue
        m = _ABELIAN.match(text, lex.pos)
        if m:
            j = int(m.group(1))
            vec = parse_int_list(m.group(2), lex, start)
            lex.pos = m.end()
            k = lex.power()
            if not 1 <= j <= spec.num_factors:
                raise lex.error(f"no abelian factor g{j}", start)
            if len(vec) != spec.rank(j):
                raise lex.error(f"g{j} has rank {spec.rank(j)}, got {len(vec)} coordinates", start)
            raw.append(AbelianSyllable(j, tuple(k * c for c in vec)))
            continue
        m = _CANONICAL.match(text, lex.pos)
        if m:
            index = int(m.group(2))
            sign = 1 if m.group(1) == "a" else -1
            lex.pos = m.end()
            if not 1 <= index <= spec.free_rank:
                raise lex.error(f"no free generator a{index}", start)
        else:
            hit = next((name for name in names if text.startswith(name, lex.pos)), None)
            if hit is None:
                raise lex.error(f"unexpected input {text[lex.pos:lex.pos + 8]!r}")
            index, sign = table[hit]
            lex.pos += len(hit)
        k = lex.power()
        letter = FreeLetter(index, sign if k >= 0 else -sign)
        raw.extend([letter] * abs(k))
    return normalize(raw)


def format_syllable(s, spec: GroupSpec) -> str:
    if isinstance(s, FreeLetter):
        name = spec.free_names[s.index - 1]
        if s.sign == 1:
            return name
        table = _name_table(spec.free_names)
        up = name.upper() if name.islower() else name.swapcase()
        if table.get(up) == (s.index, -1):
            return up
        return f"{name}^-1"
    return f"g{s.factor}[{','.join(str(c) for c in s.vector)}]"


def format_word(u: NormalWord, spec: GroupSpec) -> str:
    if not u.syllables:
        return "1"
    return " ".join(format_syllable(s, spec) for s in u.syllables)


def parse_matrix(text: str) -> tuple[tuple[int, ...], ...]:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad matrix {text!r}: {exc.msg}", 1, exc.colno)
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError(f"matrix must be a list of rows, got {text!r}")
    if any(len(r) != len(rows) for r in rows):
        raise ParseError("matrix must be square")
    if not all(isinstance(c, int) for r in rows for c in r):
        raise ParseError("matrix entries must be integers")
    return tuple(tuple(r) for r in rows)


def parse_vector(text: str) -> tuple[int, ...]:
    try:
        vec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad vector {text!r}: {exc.msg}", 1, exc.colno)
    if not isinstance(vec, list) or not all(isinstance(c, int) for c in vec):
        raise ParseError(f"vector must be a list of integers, got {text!r}")
    return tuple(vec)


# declaration files -------------------------------------------------------

class Statement:
    """One logical statement of a declaration file, with its source position."""

    __slots__ = ("text", "line", "column", "source")

    def __init__(self, text, line, column, source):
        self.text = text
        self.line = line
        self.column = column
        self.source = source

    def error(self, message, offset=0) -> ParseError:
        return ParseError(message, self.line, self.column + offset, self.source)

    def __repr__(self):
        return f"Statement({self.text!r}, {self.line}:{self.column})"


def split_statements(text: str, source: str | None = None) -> list[Statement]:
    """Split on newlines and ';', keeping '{' and '}' as statements of their own.

    Braces inside square brackets (none occur today) are not special-cased;
    ``#`` starts a comment.
    """
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        start = 0
        depth = 0
        for i, ch in enumerate(line + ";"):
            if ch in "[(":
                depth += 1
            elif ch in "])":
                depth -= 1
            if depth == 0 and ch in ";{}":
                chunk = line[start:i]
                if chunk.strip():
                    lead = len(chunk) - len(chunk.lstrip())
                    out.append(Statement(chunk.strip(), lineno, start + lead + 1, source))
                if ch in "{}":
                    out.append(Statement(ch, lineno, i + 1, source))
                start = i + 1
    return out


def parse_group_block(stmts: list[Statement], i: int) -> tuple[GroupSpec, int]:
    """Parse ``group { free ...; abelian ... }`` starting at the statement after '{'."""
    free_names = None
    free_rank = 0
    ranks: list[int] = []
    while i < len(stmts) and stmts[i].text != "}":
        st = stmts[i]
        words = st.text.split()
        if words[0] == "free":
            if len(words) == 2 and words[1].isdigit():
                free_rank = int(words[1])
                free_names = None
            else:
                free_names = tuple(words[1:])
                free_rank = len(free_names)
                for name in free_names:
                    if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name) or re.fullmatch(r"g\d+", name):
                        raise st.error(f"bad generator name {name!r}")
                if len(set(free_names)) != len(free_names):
                    raise st.error("duplicate generator names")
        elif words[0] == "abelian":
            try:
                ranks.extend(int(w) for w in words[1:])
            except ValueError:
                raise st.error("abelian ranks must be integers")
        else:
            raise st.error(f"unknown group field {words[0]!r}")
        i += 1
    if i >= len(stmts):
        raise ParseError("unterminated group block", stmts[-1].line if stmts else None, None,
                         stmts[-1].source if stmts else None)
    try:
        spec = GroupSpec(tuple(ranks), free_rank, free_names)
    except ValueError as exc:
        raise stmts[i].error(str(exc))
    return spec, i + 1


_ASSIGN = re.compile(r"(matrix|conj)\s+g(\d+)\s*=\s*(.*)$")
_MAP = re.compile(r"map\s+(\S+)\s*->\s*(.*)$")


def word_at(st: Statement, text: str, spec: GroupSpec) -> NormalWord:
    offset = st.text.find(text) if text else 0
    return parse_word(text, spec, line=st.line, column=st.column + max(offset, 0), source=st.source)
