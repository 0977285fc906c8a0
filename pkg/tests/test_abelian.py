import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from helpers import random_gl
from polexp.abelian import (
    affine_orbit_growth,
    component_palangre_spectrum,
    component_spectrum,
    minimal_poly_of_vector,
    orbit_growth,
    orbit_oracle,
    palangre_growth,
    palangre_oracle,
)
from polexp.errors import DimensionMismatch, NotUnimodular
from polexp.fit import fit_growth
from polexp.growth import GrowthType
from polexp.intmat import identity_matrix, mat_pow, mat_vec

GOLD2 = (3 + math.sqrt(5)) / 2
CAT = ((2, 1), (1, 1))
SHEAR = ((1, 1), (0, 1))
JORDAN3 = ((1, 1, 0), (0, 1, 1), (0, 0, 1))


def krylov_rank(a, v):
    """Rank of [v, Av, ..., A^k v] by fraction-free elimination; an independent oracle for deg p."""
    k = len(a)
    rows, w = [], tuple(v)
    for _ in range(k + 1):
        rows.append([Fraction(x) for x in w])
        w = mat_vec(a, w)
    rank = 0
    for col in range(k):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def apply_poly(p, a, v):
    out = [0] * len(v)
    for c in p:
        out = [x + c * y for x, y in zip(mat_vec(a, out), v)]
    return out


# minimal polynomial -------------------------------------------------------

def test_min_poly_zero_vector():
    assert minimal_poly_of_vector(CAT, (0, 0)).coefficients == (1,)


def test_min_poly_identity():
    assert minimal_poly_of_vector(identity_matrix(2), (1, 0)).coefficients == (1, -1)


def test_min_poly_cat_map():
    p = minimal_poly_of_vector(CAT, (1, 0))
    assert p.coefficients == (1, -3, 1)
    assert apply_poly(p.coefficients, CAT, (1, 0)) == [0, 0]
    assert krylov_rank(CAT, (1, 0)) == 2


def test_min_poly_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        minimal_poly_of_vector(CAT, (1, 0, 0))


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_min_poly_annihilates_and_is_minimal(seed, k):
    rng = random.Random(seed)
    a = random_gl(k, rng)
    v = tuple(rng.randint(-3, 3) for _ in range(k))
    p = minimal_poly_of_vector(a, v)
    assert p.coefficients[0] == 1
    assert not any(apply_poly(p.coefficients, a, v))
    assert p.degree == krylov_rank(a, v) <= k


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_root_product_matches_constant_term(seed, k):
    rng = random.Random(seed)
    a = random_gl(k, rng)
    v = tuple(rng.randint(-3, 3) for _ in range(k))
    p = minimal_poly_of_vector(a, v)
    if p.degree == 0:
        return
    prod = math.prod(abs(r) ** m for r, m in p.roots)
    assert sum(m for _, m in p.roots) == p.degree
    assert prod == pytest.approx(abs(p.coefficients[-1]), rel=1e-9)


# orbit growth -------------------------------------------------------------

def test_orbit_growth_examples():
    g = orbit_growth(CAT, (1, 0))
    assert (g.d, g.lam) == (0, pytest.approx(2.6180339887, abs=1e-9))
    assert orbit_growth(CAT, (3, -7)).lam == pytest.approx(GOLD2, rel=1e-12)
    assert orbit_growth(SHEAR, (0, 1)).as_tuple() == (1, 1.0)
    assert orbit_growth(SHEAR, (1, 0)).as_tuple() == (0, 1.0)
    assert orbit_growth(JORDAN3, (0, 0, 1)).as_tuple() == (2, 1.0)
    assert orbit_growth(CAT, (0, 0)).as_tuple() == (0, 1.0)


def test_orbit_growth_matches_iteration_oracle():
    assert fit_growth(orbit_oracle(CAT, (1, 0), 30)).lambda_hat == pytest.approx(GOLD2, rel=1e-6)
    seq = orbit_oracle(JORDAN3, (0, 0, 1), 30)
    # third coordinate 1, second n, first C(n,2)
    assert seq == [1 + n + n * (n - 1) // 2 for n in range(31)]
    assert fit_growth(seq).d_hat == 2


def test_not_unimodular():
    with pytest.raises(NotUnimodular):
        orbit_growth(((2, 0), (0, 1)), (1, 0))
    with pytest.raises(NotUnimodular):
        palangre_growth(((2, 0), (0, 1)), (1, 0))


def test_negative_eigenvalue_uses_modulus():
    g = orbit_growth(((-1, 0), (0, 1)), (1, 0))
    assert g.as_tuple() == (0, 1.0)
    g = orbit_growth(((-2, -1), (-1, -1)), (1, 0))
    assert g.lam == pytest.approx(GOLD2)


@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(2, 3))
def test_power_law(seed, k, p):
    rng = random.Random(seed)
    a = random_gl(k, rng)
    v = tuple(rng.randint(-3, 3) for _ in range(k))
    g, gp = orbit_growth(a, v), orbit_growth(mat_pow(a, p), v)
    assert gp.d == g.d
    assert gp.lam == pytest.approx(g.lam ** p, rel=1e-9)


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_lambda_is_algebraic_of_bounded_degree(seed, k):
    rng = random.Random(seed)
    a = random_gl(k, rng)
    v = tuple(rng.randint(-3, 3) for _ in range(k))
    g = orbit_growth(a, v)
    p = minimal_poly_of_vector(a, v)
    assert g.lam >= 1
    # eta itself has degree <= k; |eta| needs up to 2k^2 when eta is not real
    top = [r for r, _ in p.roots if abs(abs(r) - g.lam) <= 1e-9 * g.lam]
    assert top or p.degree == 0
    bound = k if any(abs(r.imag) <= 1e-9 and r.real > 0 for r in top) else 2 * k * k
    assert g.poly is not None and len(g.poly) - 1 <= bound
    assert sum(c * g.lam ** i for i, c in enumerate(reversed(g.poly))) == pytest.approx(0, abs=1e-6 * g.lam ** len(g.poly))


# palangres ----------------------------------------------------------------

def test_palangre_examples():
    assert palangre_growth(identity_matrix(3), (0, 2, 0)).as_tuple() == (1, 1.0)
    g = palangre_growth(CAT, (1, 0))
    assert (g.d, g.lam) == (0, pytest.approx(GOLD2))
    assert palangre_growth(SHEAR, (0, 1)).as_tuple() == (2, 1.0)
    assert palangre_growth(CAT, (0, 0)).as_tuple() == (0, 1.0)


def test_palangre_oracle_is_partial_sums():
    assert palangre_oracle(SHEAR, (0, 1), 5) == [0, 1, 3, 6, 10, 15]
    # sum_{k<n} (k, 1) = (n(n-1)/2, n)
    assert fit_growth(palangre_oracle(SHEAR, (0, 1), 30)).d_hat == 2


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_palangre_degree_bump_only_at_one(seed, k):
    rng = random.Random(seed)
    a = random_gl(k, rng)
    v = tuple(rng.randint(-3, 3) for _ in range(k))
    g, s = orbit_growth(a, v), palangre_growth(a, v)
    assert s.same_lambda(g)
    assert s.d - g.d in (0, 1)
    if s.d == g.d + 1:
        assert g.is_polynomial


def test_affine_orbit():
    # x_{n+1} = x_n + c from 0: linear
    assert affine_orbit_growth(identity_matrix(2), (1, 0), (0, 0)).as_tuple() == (1, 1.0)
    assert affine_orbit_growth(identity_matrix(2), (0, 0), (5, 0)).as_tuple() == (0, 1.0)


# oracle -------------------------------------------------------------------

def test_orbit_oracle_examples():
    assert orbit_oracle(((1,),), (2,), 6) == [2] * 7
    seq = orbit_oracle(CAT, (1, 0), 30)
    assert seq[:5] == [1, 3, 8, 21, 55]
    assert seq[30] / seq[29] == pytest.approx(GOLD2, abs=1e-6)


# component spectra ----------------------------------------------------------

def test_component_spectra():
    spec = component_spectrum(SHEAR)
    assert [g.as_tuple() for g in sorted(spec)] == [(0, 1.0), (1, 1.0)]
    pal = component_palangre_spectrum(SHEAR)
    assert GrowthType(2, 1.0) in pal
    assert GrowthType(0, GOLD2) in component_spectrum(CAT)


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_fitted_oracle_matches_exact_growth(seed, k):
    rng = random.Random(seed)
    a = random_gl(k, rng)
    v = tuple(rng.randint(-5, 5) for _ in range(k))
    g = orbit_growth(a, v)
    f = fit_growth(orbit_oracle(a, v, 30))
    assert f.d_hat == g.d
    assert f.lambda_hat == pytest.approx(g.lam, rel=0.01)
