"""Sets of growth types: closure, rescaling, empirical enumeration and bounds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from polexp.abelian import component_palangre_spectrum, component_spectrum
from polexp.automorphism import Automorphism
from polexp.errors import LengthBudgetExceeded, TooShort
from polexp.fit import FitOptions, fit_growth
from polexp.growth import LAMBDA_TOL, ONE, GrowthType
from polexp.intmat import mat_vec
from polexp.words import AbelianSyllable, FreeLetter, NormalWord, normalize

EMPIRICAL_TOL = 0.02


@dataclass(frozen=True)
class Spectrum:
    """A finite set of growth types; (0, 1) is always a member."""

    entries: tuple[GrowthType, ...] = ()
    tol: float = LAMBDA_TOL

    def __post_init__(self):
        object.__setattr__(self, "entries", _dedup(list(self.entries) + [ONE], self.tol))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, t: GrowthType) -> bool:
        return self.member(t)

    def member(self, t: GrowthType, tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        return any(e.d == t.d and e.same_lambda(t, tol) for e in self.entries)

    def dominated(self, t: GrowthType, tol: float | None = None) -> bool:
        """Whether t is at most some member."""
        tol = self.tol if tol is None else tol
        return any(t.compare(e, tol) <= 0 for e in self.entries)

    def union(self, *others: Iterable[GrowthType]) -> Spectrum:
        items = list(self.entries)
        for o in others:
            items.extend(o)
        return Spectrum(tuple(items), self.tol)

    def same_as(self, other: Spectrum, tol: float | None = None) -> bool:
        return all(other.member(t, tol) for t in self) and all(self.member(t, tol) for t in other)

    def as_pairs(self) -> list[tuple[int, float]]:
        return [t.as_tuple() for t in self.entries]

    def __str__(self):
        return "{" + ", ".join(str(t) for t in self.entries) + "}"


def _dedup(types: list[GrowthType], tol: float) -> tuple[GrowthType, ...]:
    out: list[GrowthType] = []
    for t in sorted(types, key=lambda t: (t.lam, t.d)):
        if not any(o.d == t.d and o.same_lambda(t, tol) for o in out):
            out.append(t)
    return tuple(out)


def plus_closure(s: Spectrum) -> Spectrum:
    """Add (d + 1, 1) for every polynomial entry (d, 1)."""
    extra = [t.bump() for t in s if t.is_polynomial]
    return s.union(extra)


def power_rescale(s: Spectrum, k: float, inverse: bool = False) -> Spectrum:
    """(d, lambda^k), or (d, lambda^(1/k)) with ``inverse``."""
    if k <= 0:
        raise ValueError("k must be positive")
    e = 1.0 / k if inverse else float(k)
    return Spectrum(tuple(t.rescale(e) for t in s), s.tol)


def combination_bound(component_spectra: Sequence[tuple[Iterable[GrowthType], Iterable[GrowthType]]],
                      ct_eigenvalues: Sequence[float], n_strata: int | None = None,
                      mode: str = "degrees") -> Spectrum:
    """Growth types allowed for conjugacy classes of a map built from these pieces.

    Every rate is 1, a transition eigenvalue or a rate from a component
    spectrum or palangre spectrum.  In ``degrees`` mode each such rate comes
    with every degree up to (number of strata) + (largest component
    degree), then the set is closed under ``plus_closure``.  In ``closure``
    mode only the listed types and their closure are returned.
    """
    base = [ONE] + [GrowthType(0, lam) for lam in ct_eigenvalues]
    for spec, pal in component_spectra:
        base.extend(spec)
        base.extend(pal)
    if mode == "closure":
        return plus_closure(Spectrum(tuple(base)))
    if mode != "degrees":
        raise ValueError(f"unknown mode {mode!r}")
    if n_strata is None:
        n_strata = max(1, len(ct_eigenvalues))
    comp_deg = max((t.d for spec, pal in component_spectra for t in itertools.chain(spec, pal)), default=0)
    cap = n_strata + comp_deg
    rates = Spectrum(tuple(GrowthType(0, t.lam, t.poly) for t in base))
    out = [GrowthType(d, t.lam, t.poly) for t in rates for d in range(cap + 1)]
    return plus_closure(Spectrum(tuple(out)))


def ct_combination_bound(ct, mode: str = "degrees") -> Spectrum:
    """combination_bound for a CT map: its fat vertex matrices, opaque spectra and EG strata."""
    comps = []
    for j, a in sorted(ct.matrices.items()):
        comps.append((component_spectrum(a), component_palangre_spectrum(a)))
    for j, extra in sorted(ct.component_spectra.items()):
        comps.append((extra, ()))
    return combination_bound(comps, ct.eigenvalues, len(ct.strata), mode)


# lazy lengths of phi^n(g) ---------------------------------------------------

def _codes(syl) -> np.ndarray:
    """Free letters as +-index, abelian syllables as 0 (never cancels)."""
    return np.fromiter((s.index * s.sign if type(s) is FreeLetter else 0 for s in syl),
                       dtype=np.int64, count=len(syl))


class _Seg:
    """A window ``syl[lo:hi]`` of a stored word, read backwards and inverted when ``inv``."""

    __slots__ = ("syl", "codes", "lo", "hi", "inv", "pre")

    def __init__(self, syl, codes, lo, hi, inv, pre):
        self.syl, self.codes, self.lo, self.hi, self.inv, self.pre = syl, codes, lo, hi, inv, pre

    def __len__(self):
        return self.hi - self.lo

    def first(self):
        return self.syl[self.hi - 1].inverse() if self.inv else self.syl[self.lo]

    def last(self):
        return self.syl[self.lo].inverse() if self.inv else self.syl[self.hi - 1]

    def head(self, m):
        """Codes of the first m letters, in reading order."""
        if self.inv:
            return -self.codes[self.hi - m:self.hi][::-1]
        return self.codes[self.lo:self.lo + m]

    def tail(self, m):
        """Codes of the last m letters, last one first."""
        if self.inv:
            return -self.codes[self.lo:self.lo + m]
        return self.codes[self.hi - m:self.hi][::-1]

    def drop_first(self, k=1):
        if self.inv:
            self.hi -= k
        else:
            self.lo += k

    def drop_last(self, k=1):
        if self.inv:
            self.lo += k
        else:
            self.hi -= k

    def length(self) -> int:
        if self.pre is None:
            return self.hi - self.lo
        return self.pre[self.hi] - self.pre[self.lo]


def _cancel_count(left: _Seg, right: _Seg, limit: int) -> int:
    """How many free letters at the end of ``left`` cancel the start of ``right``."""
    if limit <= 0:
        return 0
    a, b = left.last(), right.first()
    if type(a) is not FreeLetter or b is not a.inverse():
        return 0
    m = 16
    while True:
        m = min(m, limit)
        a = left.tail(m)
        ok = (a != 0) & (a + right.head(m) == 0)
        if not ok.all():
            return int(np.argmin(ok))
        if m == limit:
            return m
        m *= 8


def _merge(a, b):
    """Product of two abelian syllables of one factor, or None."""
    if type(a) is AbelianSyllable and type(b) is AbelianSyllable and a.factor == b.factor:
        return AbelianSyllable(a.factor, tuple(x + y for x, y in zip(a.vector, b.vector)))
    return None


def _literal(s: AbelianSyllable) -> _Seg:
    return _Seg((s,), _ZERO, 0, 1, False, (0, s.length))


_ZERO = np.zeros(1, dtype=np.int64)


def reduce_segments(segs: list[_Seg]) -> list[_Seg]:
    stack: list[_Seg] = []
    for seg in segs:
        while stack and len(seg):
            top = stack[-1]
            k = _cancel_count(top, seg, min(len(top), len(seg)))
            if k:
                top.drop_last(k)
                seg.drop_first(k)
                if not len(top):
                    stack.pop()
                continue
            c = _merge(top.last(), seg.first())
            if c is None:
                break
            top.drop_last()
            seg.drop_first()
            if not len(top):
                stack.pop()
            if any(c.vector):
                stack.append(_literal(c))
                break
        if len(seg):
            stack.append(seg)
    return stack


def cyclic_segments_length(stack: list[_Seg]) -> int:
    stack = [s for s in stack if len(s)]
    while stack:
        first, last = stack[0], stack[-1]
        if first is last:
            limit = len(first) // 2
        else:
            limit = min(len(first), len(last))
        if limit <= 0:
            break
        k = _cancel_count(last, first, limit)
        if k:
            first.drop_first(k)
            if first is not last:
                last.drop_last(k)
            else:
                first.drop_last(k)
            stack = [s for s in stack if len(s)]
            continue
        c = _merge(last.last(), first.first())
        if c is None:
            break
        first.drop_first()
        last.drop_last()
        stack = [s for s in stack if len(s)]
        if any(c.vector):
            stack.append(_literal(c))
            break
    return sum(s.length() for s in stack)


class OrbitCache:
    """Memoized images of generators under powers of phi.

    ``phi^n`` of a free generator is stored as a word; an abelian syllable
    t of factor j maps to W_n (A^n t) W_n^-1 with W_n = phi(W_{n-1}) w_j.
    Lengths of ``phi^n(g)`` for short g are then read off by reducing a
    handful of windows into these words, never building the long word.
    """

    def __init__(self, phi: Automorphism, budget: int = 2_000_000):
        self.phi = phi
        self.budget = budget
        spec = phi.spec
        self._free = {i: [NormalWord((FreeLetter(i, 1),))] for i in range(1, spec.free_rank + 1)}
        self._conj = {j: [NormalWord(())] for j in range(1, spec.num_factors + 1)}
        self._index: dict[int, tuple] = {}
        self._limit = {}

    def _seg(self, w: NormalWord, inv: bool) -> _Seg:
        syl = w.syllables
        key = id(syl)
        if key not in self._index:
            if all(type(s) is FreeLetter for s in syl):
                pre = None
            else:
                pre = list(itertools.accumulate((s.length for s in syl), initial=0))
            # the stored word keeps syl alive, so its id stays valid
            self._index[key] = (_codes(syl), pre)
        codes, pre = self._index[key]
        return _Seg(syl, codes, 0, len(syl), inv, pre)

    def _grow(self, table, key, n, step):
        seq = table[key]
        limit = self._limit.get((id(table), key))
        if limit is not None and n > limit:
            raise LengthBudgetExceeded(f"image exceeds {self.budget} syllables", reached=limit)
        while len(seq) <= n:
            try:
                nxt = step(seq[-1])
            except LengthBudgetExceeded:
                self._limit[(id(table), key)] = len(seq) - 1
                raise LengthBudgetExceeded(f"image exceeds {self.budget} syllables", reached=len(seq) - 1)
            seq.append(nxt)
        return seq[n]

    def free_image(self, i: int, n: int) -> NormalWord:
        return self._grow(self._free, i, n, lambda w: self.phi.apply(w, self.budget))

    def conjugator(self, j: int, n: int) -> NormalWord:
        wj = self.phi.factor_conjugators[j - 1]
        return self._grow(self._conj, j, n,
                          lambda w: normalize(self.phi.apply(w, self.budget).syllables + wj.syllables))

    def segments(self, g: NormalWord, n: int) -> list[_Seg]:
        segs = []
        for s in g.syllables:
            if type(s) is FreeLetter:
                segs.append(self._seg(self.free_image(s.index, n), s.sign < 0))
            else:
                w = self.conjugator(s.factor, n)
                a = self.phi.factor_matrices[s.factor - 1]
                v = s.vector
                for _ in range(n):
                    v = mat_vec(a, v)
                if w.syllables:
                    segs.append(self._seg(w, False))
                if any(v):
                    segs.append(_literal(AbelianSyllable(s.factor, v)))
                if w.syllables:
                    segs.append(self._seg(w, True))
        return segs

    def element_length(self, g: NormalWord, n: int) -> int:
        return sum(s.length() for s in reduce_segments(self.segments(g, n)))

    def class_length(self, g: NormalWord, n: int) -> int:
        return cyclic_segments_length(reduce_segments(self.segments(g, n)))

    def lengths(self, g: NormalWord, n_max: int, conjugacy: bool = True) -> list[int]:
        """Lengths for n = 0..n_max, truncated where the budget is hit."""
        out = []
        f = self.class_length if conjugacy else self.element_length
        for n in range(n_max + 1):
            try:
                out.append(f(g, n))
            except LengthBudgetExceeded:
                break
        return out


# enumeration --------------------------------------------------------------------

def _syllable_key(s):
    if type(s) is FreeLetter:
        return (0, s.index, s.sign)
    return (1, s.factor, s.vector)


def _vectors(k: int, norm: int):
    """Non-zero integer vectors of length k and l1 norm exactly ``norm``."""
    if k == 1:
        yield (norm,)
        yield (-norm,)
        return
    for first in range(-norm, norm + 1):
        rest = norm - abs(first)
        if rest == 0:
            yield (first,) + (0,) * (k - 1)
        else:
            yield from ((first,) + v for v in _vectors(k - 1, rest))


def cyclic_classes(spec, max_length: int) -> list[NormalWord]:
    """Cyclically reduced words of length 1..max_length, one per cyclic permutation class."""
    alphabet = []
    for i in range(1, spec.free_rank + 1):
        alphabet.append((FreeLetter(i, 1), 1))
        alphabet.append((FreeLetter(i, -1), 1))
    for j, k in enumerate(spec.abelian_ranks, start=1):
        for norm in range(1, max_length + 1):
            alphabet.extend((AbelianSyllable(j, v), norm) for v in _vectors(k, norm))
    seen = set()
    out = []

    def ok_pair(a, b):
        if type(a) is FreeLetter:
            return not (type(b) is FreeLetter and b is a.inverse())
        return not (type(b) is AbelianSyllable and b.factor == a.factor)

    def rec(word, length):
        if word:
            if len(word) == 1 or ok_pair(word[-1], word[0]):
                keys = [tuple(_syllable_key(s) for s in word[i:] + word[:i]) for i in range(len(word))]
                canon = min(keys)
                if canon not in seen:
                    seen.add(canon)
                    out.append(NormalWord(tuple(word)))
        for s, l in alphabet:
            if length + l > max_length:
                continue
            if word and not ok_pair(word[-1], s):
                continue
            word.append(s)
            rec(word, length + l)
            word.pop()

    rec([], 0)
    return out


@dataclass
class EmpiricalSpectrum:
    """Fitted growth types of test classes: a lower bound for the spectrum, never a certificate."""

    spectrum: Spectrum
    witnesses: dict = field(default_factory=dict)  # index into spectrum.entries -> list of words
    skipped: list = field(default_factory=list)  # (word, reason)
    fits: list = field(default_factory=list)  # (word, FittedGrowth)


def enumerate_spectrum(phi: Automorphism, max_word_length: int = 4, n_max: int = 25,
                       budget: int = 2_000_000, options: FitOptions | None = None,
                       conjugacy: bool = True, min_terms: int = 12) -> EmpiricalSpectrum:
    cache = OrbitCache(phi, budget)
    found: list[tuple[GrowthType, list]] = [(ONE, [NormalWord(())])]
    skipped = []
    fits = []
    for g in cyclic_classes(phi.spec, max_word_length):
        seq = cache.lengths(g, n_max, conjugacy)
        if len(seq) < min_terms:
            skipped.append((g, f"budget reached after {len(seq) - 1} iterations"))
            continue
        try:
            f = fit_growth(seq, options)
        except TooShort as exc:
            skipped.append((g, str(exc)))
            continue
        fits.append((g, f))
        t = GrowthType(f.d_hat, f.lambda_hat, tol=EMPIRICAL_TOL)
        for u, ws in found:
            if u.d == t.d and u.same_lambda(t, EMPIRICAL_TOL):
                ws.append(g)
                break
        else:
            found.append((t, [g]))
    spec = Spectrum(tuple(t for t, _ in found), EMPIRICAL_TOL)
    witnesses = {}
    for k, e in enumerate(spec.entries):
        for t, ws in found:
            if t.d == e.d and t.same_lambda(e, EMPIRICAL_TOL):
                witnesses.setdefault(k, []).extend(ws)
    return EmpiricalSpectrum(spec, witnesses, skipped, fits)
