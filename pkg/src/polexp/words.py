"""Normal forms in G = Z^{k_1} * ... * Z^{k_q} * F_N.

A word is a tuple of syllables.  Free letters are interned, so two free
letters are equal exactly when they are the same object; that keeps the
reduction loops cheap on multi-million-letter words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from polexp.errors import IndexOutOfRange


@dataclass(frozen=True)
class GroupSpec:
    abelian_ranks: tuple[int, ...] = ()
    free_rank: int = 0
    # display names of the free generators; defaults to a1..aN
    free_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "abelian_ranks", tuple(int(k) for k in self.abelian_ranks))
        if any(k <= 0 for k in self.abelian_ranks):
            raise ValueError("abelian ranks must be positive")
        if self.free_rank < 0:
            raise ValueError("free rank must be non-negative")
        if not self.abelian_ranks and self.free_rank == 0:
            raise ValueError("the group must have at least one factor")
        if self.free_names is None:
            object.__setattr__(
                self, "free_names", tuple(f"a{i}" for i in range(1, self.free_rank + 1))
            )
        elif len(self.free_names) != self.free_rank:
            raise ValueError("need one name per free generator")
        else:
            object.__setattr__(self, "free_names", tuple(self.free_names))

    @property
    def num_factors(self) -> int:
        return len(self.abelian_ranks)

    def rank(self, factor: int) -> int:
        return self.abelian_ranks[factor - 1]

    def generators(self) -> list[NormalWord]:
        """Free letters first, then the standard basis of each abelian factor."""
        gens = [NormalWord((FreeLetter(i, 1),)) for i in range(1, self.free_rank + 1)]
        for j, k in enumerate(self.abelian_ranks, start=1):
            for i in range(k):
                vec = tuple(1 if t == i else 0 for t in range(k))
                gens.append(NormalWord((AbelianSyllable(j, vec),)))
        return gens

    def check(self, syllable) -> None:
        if isinstance(syllable, FreeLetter):
            if not 1 <= syllable.index <= self.free_rank:
                raise IndexOutOfRange(
                    f"free generator {syllable.index} outside 1..{self.free_rank}"
                )
        else:
            if not 1 <= syllable.factor <= self.num_factors:
                raise IndexOutOfRange(
                    f"abelian factor {syllable.factor} outside 1..{self.num_factors}"
                )
            if len(syllable.vector) != self.rank(syllable.factor):
                raise IndexOutOfRange(
                    f"factor g{syllable.factor} has rank {self.rank(syllable.factor)}, "
                    f"got a vector of length {len(syllable.vector)}"
                )


class FreeLetter:
    """A free generator or its inverse.  Instances are interned."""

    __slots__ = ("index", "sign", "_inverse")
    _pool: dict = {}

    def __new__(cls, index: int, sign: int = 1):
        key = (index, sign)
        obj = cls._pool.get(key)
        if obj is None:
            if sign not in (1, -1):
                raise ValueError("sign must be +1 or -1")
            obj = object.__new__(cls)
            object.__setattr__(obj, "index", index)
            object.__setattr__(obj, "sign", sign)
            object.__setattr__(obj, "_inverse", None)
            cls._pool[key] = obj
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("FreeLetter is immutable")

    def __reduce__(self):
        return (FreeLetter, (self.index, self.sign))

    def inverse(self) -> FreeLetter:
        inv = self._inverse
        if inv is None:
            inv = FreeLetter(self.index, -self.sign)
            object.__setattr__(self, "_inverse", inv)
        return inv

    @property
    def length(self) -> int:
        return 1

    def __repr__(self):
        return f"FreeLetter({self.index}, {self.sign})"


@dataclass(frozen=True, slots=True)
class AbelianSyllable:
    factor: int
    vector: tuple[int, ...]

    def inverse(self) -> AbelianSyllable:
        return AbelianSyllable(self.factor, tuple(-c for c in self.vector))

    @property
    def length(self) -> int:
        return sum(abs(c) for c in self.vector)

    def is_zero(self) -> bool:
        return not any(self.vector)


def reduce_into(stack: list, syllables: Iterable) -> list:
    """Push syllables onto an already-normal ``stack``, keeping it normal."""
    append = stack.append
    pop = stack.pop
    for s in syllables:
        if type(s) is FreeLetter:
            inv = s._inverse or s.inverse()
            if stack and stack[-1] is inv:
                pop()
            else:
                append(s)
        else:
            if stack:
                top = stack[-1]
                if type(top) is AbelianSyllable and top.factor == s.factor:
                    v = tuple(x + y for x, y in zip(top.vector, s.vector))
                    if any(v):
                        stack[-1] = AbelianSyllable(s.factor, v)
                    else:
                        pop()
                    continue
            if any(s.vector):
                append(s)
    return stack


@dataclass(frozen=True)
class NormalWord:
    """A reduced word; build through :func:`normalize` unless already normal."""

    syllables: tuple = ()

    def __iter__(self):
        return iter(self.syllables)

    def __len__(self):
        # number of syllables, not word length
        return len(self.syllables)

    def __bool__(self):
        return bool(self.syllables)

    def __mul__(self, other: NormalWord) -> NormalWord:
        return concat(self, other)

    def __invert__(self) -> NormalWord:
        return invert(self)

    @property
    def length(self) -> int:
        return word_length(self)

    def __repr__(self):
        return f"NormalWord({list(self.syllables)!r})"


IDENTITY = NormalWord(())


def normalize(raw: Sequence, spec: GroupSpec | None = None) -> NormalWord:
    if spec is not None:
        for s in raw:
            spec.check(s)
    return NormalWord(tuple(reduce_into([], raw)))


def concat(u: NormalWord, v: NormalWord) -> NormalWord:
    if not u.syllables:
        return v
    if not v.syllables:
        return u
    stack = list(u.syllables)
    syl = v.syllables
    i = 0
    # only the junction reduces: stop at the first syllable that does not cancel
    while i < len(syl) and stack:
        s = syl[i]
        before = len(stack)
        reduce_into(stack, (s,))
        i += 1
        if len(stack) >= before:
            break
    stack.extend(syl[i:])
    return NormalWord(tuple(stack))


def invert(u: NormalWord) -> NormalWord:
    return NormalWord(tuple(s.inverse() for s in reversed(u.syllables)))


def word_length(u: NormalWord) -> int:
    total = 0
    for s in u.syllables:
        if type(s) is FreeLetter:
            total += 1
        else:
            total += sum(map(abs, s.vector))
    return total


def _wrap_kind(first, last) -> str | None:
    if type(first) is FreeLetter:
        if type(last) is FreeLetter and last is first.inverse():
            return "cancel"
        return None
    if type(last) is AbelianSyllable and last.factor == first.factor:
        return "merge"
    return None


def cyclic_reduce(u: NormalWord) -> tuple[NormalWord, NormalWord]:
    """Return ``(core, conjugator)`` with ``u == conjugator * core * conjugator^-1``."""
    syl = list(u.syllables)
    lo, hi = 0, len(syl)
    conj: list = []
    while hi - lo >= 2:
        kind = _wrap_kind(syl[lo], syl[hi - 1])
        if kind == "cancel":
            conj.append(syl[lo])
            lo += 1
            hi -= 1
        elif kind == "merge":
            first, last = syl[lo], syl[hi - 1]
            conj.append(first)
            merged = AbelianSyllable(first.factor, tuple(a + b for a, b in zip(last.vector, first.vector)))
            lo += 1
            if merged.is_zero():
                hi -= 1
            else:
                syl[hi - 1] = merged
        else:
            break
    core = NormalWord(tuple(syl[lo:hi]))
    return core, normalize(conj)


def conj_length(u: NormalWord) -> int:
    return word_length(cyclic_reduce(u)[0])


def cyclic_rotations(u: NormalWord) -> list[NormalWord]:
    """All cyclic permutations of a cyclically reduced word (as normal words)."""
    syl = u.syllables
    out = []
    for i in range(len(syl)):
        w = normalize(syl[i:] + syl[:i])
        out.append(w)
    return out or [u]


def letter(index: int, sign: int = 1) -> NormalWord:
    return NormalWord((FreeLetter(index, sign),))


def abelian(factor: int, *vector: int) -> NormalWord:
    if len(vector) == 1 and isinstance(vector[0], (tuple, list)):
        vector = tuple(vector[0])
    return normalize([AbelianSyllable(factor, tuple(vector))])


def power(u: NormalWord, n: int) -> NormalWord:
    if n < 0:
        return power(invert(u), -n)
    out = IDENTITY
    base = u
    while n:
        if n & 1:
            out = concat(out, base)
        base = concat(base, base)
        n >>= 1
    return out


def product(words: Iterable[NormalWord]) -> NormalWord:
    stack: list = []
    for w in words:
        reduce_into(stack, w.syllables)
    return NormalWord(tuple(stack))
