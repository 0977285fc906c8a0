import random

import pytest
from hypothesis import given, strategies as st

from helpers import MIXED, fibonacci, random_mixed_automorphism, random_word, words
from polexp.automorphism import (
    Automorphism,
    TorusElement,
    apply,
    free_automorphism,
    iterate,
    orbit_lengths,
    palangre_left,
    palangre_right,
    torus_inverse,
    torus_mul,
    torus_palangre,
    twist_by_element,
)
from polexp.errors import ExponentMismatch, InvalidAutomorphism, LengthBudgetExceeded, SpecMismatch
from polexp.fit import fit_growth
from polexp.syntax import parse_word
from polexp.words import IDENTITY, GroupSpec, concat, conj_length, invert, letter, power, word_length

F2 = GroupSpec((), 2, ("a", "b"))


def w(text, spec=F2):
    return parse_word(text, spec)


FIB = free_automorphism(F2, [w("a b"), w("a")], [w("b"), w("B a")])
BG = free_automorphism(F2, [w("b a B"), w("b b a B")], [w("a B a b A"), w("b A")])

seeds = st.integers(0, 10_000)


def test_identity_apply():
    rng = random.Random(1)
    ident = Automorphism.identity(MIXED)
    for _ in range(20):
        u = random_word(rng, MIXED, 6)
        assert ident.apply(u) == u


def test_fib_apply():
    assert FIB.apply(w("a")) == w("a b")


def test_fib_lengths_are_fibonacci():
    seq = orbit_lengths(FIB, w("a"), 20)
    assert seq == [fibonacci(n + 2) for n in range(21)]


def test_bridson_groves_quadratic():
    seq = orbit_lengths(BG, w("b"), 30)
    # exact: third differences vanish once the pattern settles
    d3 = [seq[i + 3] - 3 * seq[i + 2] + 3 * seq[i + 1] - seq[i] for i in range(5, 28)]
    assert not any(d3)
    f = fit_growth(seq)
    assert (f.d_hat, f.lambda_hat) == (2, 1.0)


def test_iterate_zero_and_inverse():
    u = w("a b A")
    assert iterate(FIB, u, 0) == u
    assert iterate(FIB, iterate(FIB, u, 5), -5) == u


def test_budget():
    with pytest.raises(LengthBudgetExceeded):
        iterate(FIB, w("a"), 40, budget=1000)
    with pytest.raises(LengthBudgetExceeded) as info:
        orbit_lengths(FIB, w("a"), 40, budget=1000)
    assert info.value.reached is not None
    assert len(orbit_lengths(FIB, w("a"), 40, budget=1000, truncate=True)) < 41


def test_spec_mismatch():
    with pytest.raises(SpecMismatch):
        apply(FIB, letter(3))


def test_claimed_inverse_is_checked():
    with pytest.raises(InvalidAutomorphism):
        free_automorphism(F2, [w("a b"), w("a")], [w("b"), w("a")])
    with pytest.raises(InvalidAutomorphism):
        Automorphism(GroupSpec((2,), 0), (), (((2, 0), (0, 1)),), (), (), (((1, 0), (0, 1)),), ())


@given(seeds)
def test_homomorphism(seed):
    rng = random.Random(seed)
    phi = random_mixed_automorphism(rng)
    u, v = random_word(rng, MIXED, 5), random_word(rng, MIXED, 5)
    assert phi.apply(concat(u, v)) == concat(phi.apply(u), phi.apply(v))
    assert phi.inverse().apply(phi.apply(u)) == u


def test_palangre_basics():
    g, h = w("a"), w("b A")
    assert palangre_left(FIB, g, 0) == IDENTITY == palangre_right(FIB, h, 0)
    ident = Automorphism.identity(F2)
    assert palangre_left(ident, w("a b"), 4) == power(w("a b"), 4)


@given(seeds, st.integers(0, 6))
def test_palangre_recursions(seed, n):
    rng = random.Random(seed)
    phi = random_mixed_automorphism(rng, 3)
    g, h = random_word(rng, MIXED, 3), random_word(rng, MIXED, 3)
    assert palangre_left(phi, g, n + 1) == concat(palangre_left(phi, g, n), iterate(phi, g, n))
    assert palangre_right(phi, h, n + 1) == concat(iterate(phi, h, n), palangre_right(phi, h, n))


def test_torus_examples():
    g, h = w("a"), w("b")
    assert torus_mul(TorusElement(g, 0), TorusElement(h, 0), FIB) == TorusElement(w("a b"), 0)
    t = TorusElement(IDENTITY, 1)
    t_inv = TorusElement(IDENTITY, -1)
    assert torus_mul(torus_mul(t, TorusElement(h, 0), FIB), t_inv, FIB) == TorusElement(FIB.apply(h), 0)


@given(seeds)
def test_torus_associative_and_inverse(seed):
    rng = random.Random(seed)
    phi = random_mixed_automorphism(rng, 3)
    x, y, z = (TorusElement(random_word(rng, MIXED, 3), rng.randint(-2, 2)) for _ in range(3))
    assert torus_mul(torus_mul(x, y, phi), z, phi) == torus_mul(x, torus_mul(y, z, phi), phi)
    assert torus_mul(x, torus_inverse(x, phi), phi) == TorusElement(IDENTITY, 0)


def test_torus_palangre_examples():
    g = w("a B")
    alpha, beta = TorusElement(g, 1), TorusElement(IDENTITY, 1)
    assert torus_palangre(alpha, beta, FIB, 0) == IDENTITY
    assert torus_palangre(alpha, beta, FIB, 4) == palangre_left(FIB, g, 4)
    with pytest.raises(ExponentMismatch):
        torus_palangre(TorusElement(g, 1), TorusElement(g, 2), FIB, 2)


@given(seeds, st.integers(1, 3), st.integers(0, 5))
def test_torus_palangre_identity(seed, k, n):
    rng = random.Random(seed)
    phi = random_mixed_automorphism(rng, 3)
    g, h = random_word(rng, MIXED, 3), random_word(rng, MIXED, 3)
    lhs = torus_palangre(TorusElement(g, k), TorusElement(invert(h), k), phi, n)
    phik = phi.power(k)
    assert lhs == concat(palangre_left(phik, g, n), palangre_right(phik, h, n))


def test_twist_examples():
    rng = random.Random(5)
    phi = random_mixed_automorphism(rng)
    assert twist_by_element(phi, IDENTITY).free_images == phi.free_images
    a = random_word(rng, MIXED, 3)
    psi = twist_by_element(phi, a)
    for _ in range(10):
        x = random_word(rng, MIXED, 4)
        assert psi.apply(x) == concat(a, concat(phi.apply(x), invert(a)))
        for n in range(5):
            assert conj_length(iterate(psi, x, n)) == conj_length(iterate(phi, x, n))


@given(seeds, st.integers(0, 8))
def test_twisted_palangre_identity(seed, n):
    rng = random.Random(seed)
    phi = random_mixed_automorphism(rng, 3)
    g, h = random_word(rng, MIXED, 3), random_word(rng, MIXED, 3)
    lhs = concat(iterate(phi, g, n), palangre_right(phi, h, n))
    rhs = concat(palangre_right(phi, concat(concat(phi.apply(g), h), invert(g)), n), g)
    assert lhs == rhs


@given(seeds, st.integers(0, 6))
def test_conjugacy_growth_is_conjugation_invariant(seed, n):
    rng = random.Random(seed)
    phi = random_mixed_automorphism(rng, 3)
    g, h = random_word(rng, MIXED, 3), random_word(rng, MIXED, 3)
    assert conj_length(iterate(phi, concat(h, concat(g, invert(h))), n)) == conj_length(iterate(phi, g, n))


@given(seeds, st.integers(1, 3), st.integers(0, 4))
def test_power_iteration(seed, k, n):
    rng = random.Random(seed)
    phi = random_mixed_automorphism(rng, 3)
    g = random_word(rng, MIXED, 4)
    assert iterate(phi.power(k), g, n) == iterate(phi, g, k * n)


@given(words())
def test_inverse_power(u):
    rng = random.Random(0)
    phi = random_mixed_automorphism(rng)
    assert iterate(phi.power(-2), iterate(phi, u, 2), 1) == u
    assert word_length(u) == word_length(iterate(phi, iterate(phi, u, 2), -2))
