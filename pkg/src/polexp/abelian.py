"""Exact growth of A^n v and of the sums (I + A + ... + A^{n-1}) v for A in GL(k, Z)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from polexp.algebraic import (
    irreducible_factors,
    is_cyclotomic,
    max_modulus,
    modulus_polynomial,
    poly_eval_matrix_vector,
    polished_roots,
)
from polexp.errors import DimensionMismatch, NotUnimodular
from polexp.growth import GrowthType, LAMBDA_TOL
from polexp.intmat import Matrix, as_matrix, det, identity_matrix, mat_vec


@dataclass(frozen=True)
class VectorMinimalPoly:
    coefficients: tuple[int, ...]  # monic, highest degree first
    roots: tuple[tuple[complex, int], ...]
    factors: tuple[tuple[tuple[int, ...], int], ...]  # irreducible factors with multiplicity

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


def _check(a, v=None) -> Matrix:
    a = as_matrix(a)
    k = len(a)
    if any(len(r) != k for r in a):
        raise DimensionMismatch("matrix must be square")
    if v is not None and len(v) != k:
        raise DimensionMismatch(f"vector has length {len(v)}, matrix is {k}x{k}")
    return a


def _require_unimodular(a: Matrix) -> None:
    if abs(det(a)) != 1:
        raise NotUnimodular(f"det = {det(a)}, need +-1")


def krylov_dependence(a: Matrix, v: Sequence[int]) -> tuple[int, ...]:
    """Monic p of least degree with p(A) v = 0, by exact elimination on v, Av, A^2 v, ..."""
    k = len(a)
    # rows: (reduced vector, combination of Krylov vectors it equals)
    basis: list[tuple[list[Fraction], list[Fraction], int]] = []
    w = tuple(v)
    for m in range(k + 1):
        vec = [Fraction(x) for x in w]
        comb = [Fraction(0)] * m + [Fraction(1)]
        for bvec, bcomb, piv in basis:
            c = vec[piv]
            if c:
                vec = [x - c * y for x, y in zip(vec, bvec)]
                comb = [x - c * (bcomb[i] if i < len(bcomb) else 0) for i, x in enumerate(comb)]
        piv = next((i for i, x in enumerate(vec) if x), None)
        if piv is None:
            # comb[0..m] with comb[m] = 1 annihilates v
            if any(c.denominator != 1 for c in comb):
                raise ArithmeticError("non-integral minimal polynomial")
            return tuple(int(c) for c in reversed(comb))
        c = vec[piv]
        vec = [x / c for x in vec]
        comb = [x / c for x in comb]
        basis.append((vec, comb, piv))
        w = mat_vec(a, w)
    raise ArithmeticError("Krylov sequence failed to become dependent")


def minimal_poly_of_vector(a, v) -> VectorMinimalPoly:
    a = _check(a, v)
    v = tuple(int(x) for x in v)
    if not any(v):
        return VectorMinimalPoly((1,), (), ())
    p = krylov_dependence(a, v)
    if any(poly_eval_matrix_vector(p, a, v)):
        raise ArithmeticError("minimal polynomial check failed")
    facs = irreducible_factors(p)
    roots = tuple((r, m) for q, m in facs for r in polished_roots(q))
    return VectorMinimalPoly(p, roots, facs)


def _growth_from_factors(facs, bump_at_one: bool = False) -> GrowthType:
    """(d, lambda) from irreducible factors: lambda = top modulus, d from multiplicities."""
    if not facs:
        return GrowthType(0, 1.0, (1, -1))
    lam = max(max_modulus(q) for q, _ in facs)
    top = [(q, m) for q, m in facs if abs(max_modulus(q) - lam) <= LAMBDA_TOL * lam]
    d = 0
    for q, m in top:
        d = max(d, m - 1 + (1 if bump_at_one and q == (1, -1) else 0))
    return GrowthType(d, lam, modulus_polynomial(top[0][0], lam))


def orbit_growth(a, v) -> GrowthType:
    a = _check(a, v)
    _require_unimodular(a)
    return _growth_from_factors(minimal_poly_of_vector(a, v).factors)


def augmented(a, c) -> Matrix:
    """[[A, c], [0, 1]]."""
    a = as_matrix(a)
    rows = [tuple(r) + (int(x),) for r, x in zip(a, c)]
    rows.append(tuple(0 for _ in a) + (1,))
    return tuple(rows)


def affine_orbit_growth(a, c, g) -> GrowthType:
    """Growth of x_n with x_0 = g and x_{n+1} = A x_n + c."""
    a = _check(a, c)
    return orbit_growth(augmented(a, c), tuple(g) + (1,))


def palangre_growth(a, v) -> GrowthType:
    """Growth of ||(I + A + ... + A^{n-1}) v||, by two independent routes."""
    a = _check(a, v)
    _require_unimodular(a)
    if not any(v):
        return GrowthType(0, 1.0, (1, -1))
    via_affine = orbit_growth(augmented(a, v), (0,) * len(a) + (1,))
    via_roots = _growth_from_factors(minimal_poly_of_vector(a, v).factors, bump_at_one=True)
    if via_affine.d != via_roots.d or not via_affine.same_lambda(via_roots):
        raise ArithmeticError(f"palangre routes disagree: {via_affine} vs {via_roots}")
    return via_roots


def orbit_oracle(a, v, n_max: int) -> list[int]:
    a = _check(a, v)
    out = []
    w = tuple(v)
    for _ in range(n_max + 1):
        out.append(sum(abs(x) for x in w))
        w = mat_vec(a, w)
    return out


def palangre_oracle(a, v, n_max: int) -> list[int]:
    """l1 norms of sum_{i<n} A^i v for n = 0..n_max."""
    a = _check(a, v)
    out = []
    s = tuple(0 for _ in v)
    w = tuple(v)
    for _ in range(n_max + 1):
        out.append(sum(abs(x) for x in s))
        s = tuple(x + y for x, y in zip(s, w))
        w = mat_vec(a, w)
    return out


def matrix_minimal_poly(a) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Irreducible factors of the minimal polynomial of A, as the lcm of the vector ones."""
    a = _check(a)
    k = len(a)
    best: dict[tuple[int, ...], int] = {}
    for row in identity_matrix(k):
        for q, m in minimal_poly_of_vector(a, row).factors:
            best[q] = max(best.get(q, 0), m)
    return tuple(sorted(best.items()))


def component_spectrum(a) -> list[GrowthType]:
    """Growth types of orbits of all vectors: (0,1) and (e-1, |q|) for e <= mult(q)."""
    a = _check(a)
    _require_unimodular(a)
    out = [GrowthType(0, 1.0, (1, -1))]
    for q, m in matrix_minimal_poly(a):
        lam = max_modulus(q)
        poly = modulus_polynomial(q, lam)
        out.extend(GrowthType(e - 1, lam, poly) for e in range(1, m + 1))
    return _dedup(out)


def component_palangre_spectrum(a, k: int | None = None) -> list[GrowthType]:
    """Palangre growth types of A^k (all k >= 1 when ``k`` is None), in units of A.

    A cyclotomic factor whose roots become 1 under the k-th power contributes
    the degree bump (e, 1).
    """
    a = _check(a)
    out = list(component_spectrum(a))
    for q, m in matrix_minimal_poly(a):
        if not is_cyclotomic(q):
            continue
        if k is not None and not all(abs(r ** k - 1) < 1e-9 for r in polished_roots(q)):
            continue
        out.extend(GrowthType(e, 1.0, (1, -1)) for e in range(1, m + 1))
    return _dedup(out)


def _dedup(types):
    out = []
    for t in sorted(types):
        if not out or out[-1] != t:
            out.append(t)
    return out
