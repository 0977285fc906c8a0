"""Automorphisms of G = Z^{k_1} * ... * Z^{k_q} * F_N, palangres, mapping torus.

An automorphism is stored by the images of the free generators and, for
each abelian factor G_j, a matrix A_j and a conjugator w_j, so that
``phi(x) = w_j (A_j x) w_j^-1`` for x in G_j.  The inverse is part of the
input and is checked against the forward data on every generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from polexp.errors import (
    ExponentMismatch,
    InvalidAutomorphism,
    LengthBudgetExceeded,
    SpecMismatch,
)
from polexp.intmat import det, identity_matrix, mat_mul, mat_vec
from polexp.words import (
    IDENTITY,
    AbelianSyllable,
    FreeLetter,
    GroupSpec,
    NormalWord,
    concat,
    conj_length,
    invert,
    word_length,
)

Matrix = tuple[tuple[int, ...], ...]

DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True)
class Automorphism:
    spec: GroupSpec
    free_images: tuple[NormalWord, ...]
    factor_matrices: tuple[Matrix, ...] = ()
    factor_conjugators: tuple[NormalWord, ...] = ()
    inverse_free_images: tuple[NormalWord, ...] = ()
    inverse_factor_matrices: tuple[Matrix, ...] = ()
    inverse_factor_conjugators: tuple[NormalWord, ...] = ()
    verify: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        q = self.spec.num_factors
        fix = object.__setattr__
        fix(self, "free_images", tuple(self.free_images))
        fix(self, "factor_matrices", tuple(tuple(map(tuple, m)) for m in self.factor_matrices))
        fix(self, "inverse_free_images", tuple(self.inverse_free_images))
        fix(self, "inverse_factor_matrices", tuple(tuple(map(tuple, m)) for m in self.inverse_factor_matrices))
        if not self.factor_conjugators:
            fix(self, "factor_conjugators", (IDENTITY,) * q)
        if not self.inverse_factor_conjugators:
            fix(self, "inverse_factor_conjugators", (IDENTITY,) * q)
        fix(self, "factor_conjugators", tuple(self.factor_conjugators))
        fix(self, "inverse_factor_conjugators", tuple(self.inverse_factor_conjugators))
        if not self.verify:
            return
        n = self.spec.free_rank
        if len(self.free_images) != n or len(self.inverse_free_images) != n:
            raise InvalidAutomorphism(f"need {n} free generator images and {n} inverse images")
        for name, mats in (("matrix", self.factor_matrices), ("inverse matrix", self.inverse_factor_matrices)):
            if len(mats) != q:
                raise InvalidAutomorphism(f"need one {name} per abelian factor ({q})")
            for j, m in enumerate(mats, start=1):
                k = self.spec.rank(j)
                if len(m) != k or any(len(r) != k for r in m):
                    raise InvalidAutomorphism(f"{name} for g{j} must be {k}x{k}")
                if abs(det(m)) != 1:
                    raise InvalidAutomorphism(f"{name} for g{j} is not in GL({k}, Z)")
        if len(self.factor_conjugators) != q or len(self.inverse_factor_conjugators) != q:
            raise InvalidAutomorphism("need one conjugator per abelian factor")
        words = (
            self.free_images + self.inverse_free_images
            + self.factor_conjugators + self.inverse_factor_conjugators
        )
        for w in words:
            for s in w:
                self.spec.check(s)
        inv = self.inverse()
        for x in self.spec.generators():
            if inv.apply(self.apply(x)) != x:
                raise InvalidAutomorphism(f"claimed inverse fails on generator {x!r} (inverse after phi)")
            if self.apply(inv.apply(x)) != x:
                raise InvalidAutomorphism(f"claimed inverse fails on generator {x!r} (phi after inverse)")

    # construction helpers -------------------------------------------------

    @classmethod
    def identity(cls, spec: GroupSpec) -> Automorphism:
        gens = tuple(NormalWord((FreeLetter(i, 1),)) for i in range(1, spec.free_rank + 1))
        mats = tuple(identity_matrix(k) for k in spec.abelian_ranks)
        return cls(spec, gens, mats, (), gens, mats, ())

    def inverse(self) -> Automorphism:
        return Automorphism(
            self.spec,
            self.inverse_free_images,
            self.inverse_factor_matrices,
            self.inverse_factor_conjugators,
            self.free_images,
            self.factor_matrices,
            self.factor_conjugators,
            verify=False,
        )

    @cached_property
    def _letter_images(self) -> dict:
        table = {}
        for i, img in enumerate(self.free_images, start=1):
            table[FreeLetter(i, 1)] = img.syllables
            table[FreeLetter(i, -1)] = invert(img).syllables
        return table

    @cached_property
    def _conjugators(self) -> list:
        return [(w.syllables, invert(w).syllables) for w in self.factor_conjugators]

    # application ----------------------------------------------------------

    def apply(self, u: NormalWord, budget: int | None = None) -> NormalWord:
        images = self._letter_images
        conj = self._conjugators
        mats = self.factor_matrices
        stack: list = []
        append = stack.append
        pop = stack.pop
        for s in u.syllables:
            if type(s) is FreeLetter:
                pieces = (images[s],)
            else:
                j = s.factor
                w, w_inv = conj[j - 1]
                pieces = (w, (AbelianSyllable(j, mat_vec(mats[j - 1], s.vector)),), w_inv)
            for piece in pieces:
                for t in piece:
                    if type(t) is FreeLetter:
                        if stack and stack[-1] is (t._inverse or t.inverse()):
                            pop()
                        else:
                            append(t)
                    else:
                        if stack:
                            top = stack[-1]
                            if type(top) is AbelianSyllable and top.factor == t.factor:
                                v = tuple(x + y for x, y in zip(top.vector, t.vector))
                                if any(v):
                                    stack[-1] = AbelianSyllable(t.factor, v)
                                else:
                                    pop()
                                continue
                        append(t)
            if budget is not None and len(stack) > budget:
                raise LengthBudgetExceeded(
                    f"word passed the length budget of {budget} syllables"
                )
        return NormalWord(tuple(stack))

    __call__ = apply

    def compose(self, other: Automorphism) -> Automorphism:
        """``self o other``: apply ``other`` first."""
        if other.spec != self.spec:
            raise SpecMismatch("automorphisms act on different groups")
        free = tuple(self.apply(img) for img in other.free_images)
        mats = tuple(mat_mul(a, b) for a, b in zip(self.factor_matrices, other.factor_matrices))
        conj = tuple(
            concat(self.apply(w_o), w_s)
            for w_o, w_s in zip(other.factor_conjugators, self.factor_conjugators)
        )
        inv_s, inv_o = self.inverse(), other.inverse()
        inv_free = tuple(inv_o.apply(img) for img in inv_s.free_images)
        inv_mats = tuple(mat_mul(a, b) for a, b in zip(inv_o.factor_matrices, inv_s.factor_matrices))
        inv_conj = tuple(
            concat(inv_o.apply(w_s), w_o)
            for w_s, w_o in zip(inv_s.factor_conjugators, inv_o.factor_conjugators)
        )
        return Automorphism(self.spec, free, mats, conj, inv_free, inv_mats, inv_conj, verify=False)

    def power(self, k: int) -> Automorphism:
        """phi^k by composing generator images; meant for small k."""
        if k < 0:
            return self.inverse().power(-k)
        result = Automorphism.identity(self.spec)
        for _ in range(k):
            result = self.compose(result)
        return result


def _check_spec(phi: Automorphism, u: NormalWord) -> None:
    for s in u.syllables:
        phi.spec.check(s)


def apply(phi: Automorphism, u: NormalWord) -> NormalWord:
    try:
        _check_spec(phi, u)
    except Exception as exc:
        raise SpecMismatch(str(exc)) from exc
    return phi.apply(u)


def _power_step(phi: Automorphism, n: int) -> Automorphism:
    return phi if n >= 0 else phi.inverse()


def orbit(phi: Automorphism, u: NormalWord, n_max: int, budget: int = DEFAULT_BUDGET) -> Iterator[NormalWord]:
    """Yield u, phi(u), ..., phi^n_max(u), one application per step."""
    yield u
    for _ in range(n_max):
        u = phi.apply(u, budget)
        yield u


def iterate(phi: Automorphism, u: NormalWord, n: int, budget: int = DEFAULT_BUDGET) -> NormalWord:
    """phi^n(u); negative n iterates the verified inverse."""
    step = _power_step(phi, n)
    for i in range(abs(n)):
        try:
            u = step.apply(u, budget)
        except LengthBudgetExceeded as exc:
            exc.reached = i
            raise
    return u


def orbit_lengths(
    phi: Automorphism,
    g: NormalWord,
    n_max: int,
    *,
    conjugacy: bool = False,
    budget: int = DEFAULT_BUDGET,
    truncate: bool = False,
) -> list[int]:
    """|phi^n(g)| (or ||phi^n(g)||) for n = 0..n_max.

    With ``truncate`` the sequence simply stops where the budget is hit.
    """
    measure = conj_length if conjugacy else word_length
    out = []
    u = g
    for n in range(n_max + 1):
        if n:
            try:
                u = phi.apply(u, budget)
            except LengthBudgetExceeded as exc:
                if truncate:
                    break
                exc.reached = n - 1
                raise
        out.append(measure(u))
    return out


def palangre_left(phi: Automorphism, g: NormalWord, n: int, budget: int = DEFAULT_BUDGET) -> NormalWord:
    """L_n(phi, g) = g phi(g) ... phi^{n-1}(g)."""
    acc = IDENTITY
    x = g
    for i in range(n):
        acc = concat(acc, x)
        if i + 1 < n:
            x = phi.apply(x, budget)
        if len(acc) > budget:
            raise LengthBudgetExceeded(f"palangre passed the length budget of {budget}", reached=i)
    return acc


def palangre_right(phi: Automorphism, h: NormalWord, n: int, budget: int = DEFAULT_BUDGET) -> NormalWord:
    """R_n(phi, h) = phi^{n-1}(h) ... phi(h) h."""
    acc = IDENTITY
    x = h
    for i in range(n):
        acc = concat(x, acc)
        if i + 1 < n:
            x = phi.apply(x, budget)
        if len(acc) > budget:
            raise LengthBudgetExceeded(f"palangre passed the length budget of {budget}", reached=i)
    return acc


@dataclass(frozen=True)
class TorusElement:
    """g t^k in the mapping torus G x|_phi Z."""

    g: NormalWord
    k: int = 0


def torus_mul(alpha: TorusElement, beta: TorusElement, phi: Automorphism, budget: int = DEFAULT_BUDGET) -> TorusElement:
    """(g t^n)(h t^m) = g phi^n(h) t^{n+m}."""
    return TorusElement(concat(alpha.g, iterate(phi, beta.g, alpha.k, budget)), alpha.k + beta.k)


def torus_inverse(alpha: TorusElement, phi: Automorphism, budget: int = DEFAULT_BUDGET) -> TorusElement:
    """(g t^k)^-1 = t^-k g^-1 = phi^-k(g^-1) t^-k."""
    return TorusElement(iterate(phi, invert(alpha.g), -alpha.k, budget), -alpha.k)


def torus_pow(alpha: TorusElement, n: int, phi: Automorphism, budget: int = DEFAULT_BUDGET) -> TorusElement:
    base = alpha if n >= 0 else torus_inverse(alpha, phi, budget)
    acc = TorusElement(IDENTITY, 0)
    for _ in range(abs(n)):
        acc = torus_mul(acc, base, phi, budget)
    return acc


def torus_palangre(
    alpha: TorusElement, beta: TorusElement, phi: Automorphism, n: int, budget: int = DEFAULT_BUDGET
) -> NormalWord:
    """G-component of alpha^n beta^-n, built as alpha (alpha^{n-1} beta^{-(n-1)}) beta^-1.

    For alpha = g t^k and beta = h^-1 t^k this is L_n(phi^k, g) R_n(phi^k, h).
    """
    if alpha.k != beta.k:
        raise ExponentMismatch(f"pi(alpha) = {alpha.k} but pi(beta) = {beta.k}")
    if alpha.k < 1:
        raise ExponentMismatch("need pi(alpha) = pi(beta) >= 1")
    beta_inv = torus_inverse(beta, phi, budget)
    acc = TorusElement(IDENTITY, 0)
    for _ in range(n):
        acc = torus_mul(torus_mul(alpha, acc, phi, budget), beta_inv, phi, budget)
    assert acc.k == 0
    return acc.g


def twist_by_element(phi: Automorphism, a: NormalWord) -> Automorphism:
    """x -> a phi(x) a^-1."""
    a_inv = invert(a)
    free = tuple(concat(concat(a, img), a_inv) for img in phi.free_images)
    conj = tuple(concat(a, w) for w in phi.factor_conjugators)
    inv = phi.inverse()
    b = inv.apply(a_inv)
    b_inv = invert(b)
    inv_free = tuple(concat(concat(b, img), b_inv) for img in phi.inverse_free_images)
    inv_conj = tuple(concat(b, w) for w in phi.inverse_factor_conjugators)
    return Automorphism(
        phi.spec, free, phi.factor_matrices, conj,
        inv_free, phi.inverse_factor_matrices, inv_conj,
    )


def free_automorphism(spec: GroupSpec, images: Sequence[NormalWord], inverse_images: Sequence[NormalWord]) -> Automorphism:
    """Shorthand for an automorphism of a free group."""
    return Automorphism(spec, tuple(images), (), (), tuple(inverse_images), (), ())
