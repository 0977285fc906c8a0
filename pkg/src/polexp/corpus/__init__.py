"""Bundled example automorphisms and CT maps.

``manifest.json`` lists every example with its automorphism file, its CT
file (if any) and a probe element whose orbit is used for the power checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from polexp.autfile import load_automorphism
from polexp.automorphism import Automorphism
from polexp.bridge import InducedMap
from polexp.ct import CtMap
from polexp.ctfile import load_ct
from polexp.syntax import parse_word
from polexp.words import NormalWord

CORPUS_DIR = Path(__file__).resolve().parent


@dataclass(frozen=True)
class Example:
    name: str
    aut: str
    ct: str | None
    probe: str

    @property
    def aut_path(self) -> Path:
        return CORPUS_DIR / self.aut

    @property
    def ct_path(self) -> Path | None:
        return CORPUS_DIR / self.ct if self.ct else None

    @cached_property
    def automorphism(self) -> Automorphism:
        """The automorphism; for CT examples, the map induced by the CT checked against the file."""
        aut = load_automorphism(self.aut_path)
        if self.ct is None:
            return aut
        return InducedMap(self.ct_map).with_inverse(aut)

    @cached_property
    def ct_map(self) -> CtMap | None:
        return load_ct(self.ct_path).ct if self.ct else None

    @property
    def probe_word(self) -> NormalWord:
        return parse_word(self.probe, self.automorphism.spec)


def examples() -> list[Example]:
    data = json.loads((CORPUS_DIR / "manifest.json").read_text())
    return [Example(**e) for e in data["examples"]]


def example(name: str) -> Example:
    for e in examples():
        if e.name == name:
            return e
    raise KeyError(f"no corpus example {name!r}")


def resolve(path: str) -> Path:
    """A file path, falling back to a bundled corpus file of that name."""
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    bundled = CORPUS_DIR / p.name
    return bundled if bundled.exists() else p
