import pytest
from hypothesis import given

from helpers import MIXED, brute_conj_length, raw_words, words
from polexp.errors import IndexOutOfRange
from polexp.words import (
    AbelianSyllable,
    FreeLetter,
    GroupSpec,
    NormalWord,
    abelian,
    concat,
    conj_length,
    cyclic_reduce,
    invert,
    letter,
    normalize,
    word_length,
)

a, A = FreeLetter(1, 1), FreeLetter(1, -1)
b, B = FreeLetter(2, 1), FreeLetter(2, -1)
F2 = GroupSpec((), 2)


def test_groupspec_needs_a_factor():
    with pytest.raises(ValueError):
        GroupSpec((), 0)
    with pytest.raises(ValueError):
        GroupSpec((0,), 1)
    assert GroupSpec((2,), 0).num_factors == 1


def test_normalize_cancellation():
    assert normalize([a, A]) == NormalWord(())


def test_normalize_abelian_merge_to_zero():
    assert normalize([AbelianSyllable(1, (1, 0)), AbelianSyllable(1, (-1, 0))]) == NormalWord(())


def test_normalize_forced_merge():
    spec = GroupSpec((1,), 2)
    w = normalize([a, AbelianSyllable(1, (2,)), AbelianSyllable(1, (3,)), b], spec)
    assert w.syllables == (a, AbelianSyllable(1, (5,)), b)


def test_normalize_checks_indices():
    with pytest.raises(IndexOutOfRange):
        normalize([FreeLetter(3, 1)], F2)
    with pytest.raises(IndexOutOfRange):
        normalize([AbelianSyllable(1, (1,))], F2)
    with pytest.raises(IndexOutOfRange):
        normalize([AbelianSyllable(1, (1,))], GroupSpec((2,), 0))


def test_concat_examples():
    w = normalize([a, b, AbelianSyllable(1, (1, 2))])
    assert concat(w, invert(w)) == NormalWord(())
    assert concat(NormalWord(()), w) == w
    assert concat(normalize([a, b]), normalize([B, a])).syllables == (a, a)


def test_invert_examples():
    assert invert(NormalWord(())) == NormalWord(())
    w = normalize([a, AbelianSyllable(1, (1, 2))])
    assert invert(w).syllables == (AbelianSyllable(1, (-1, -2)), A)


def test_word_length_examples():
    assert word_length(NormalWord(())) == 0
    assert word_length(normalize([a, B])) == 2
    assert word_length(abelian(1, 3, -2)) == 5


def test_cyclic_reduce_examples():
    core, conj = cyclic_reduce(normalize([a, b, A]))
    assert core.syllables == (b,) and conj.syllables == (a,)
    w = normalize([a, b])
    assert cyclic_reduce(w) == (w, NormalWord(()))
    core, conj = cyclic_reduce(normalize([a, AbelianSyllable(1, (1,)), A]))
    assert core.syllables == (AbelianSyllable(1, (1,)),) and conj.syllables == (a,)


def test_cyclic_reduce_merges_abelian_wrap():
    w = normalize([AbelianSyllable(1, (1, 0)), a, AbelianSyllable(1, (2, 1))])
    core, conj = cyclic_reduce(w)
    assert word_length(core) == 1 + 4
    assert concat(concat(conj, core), invert(conj)) == w


def test_conj_length_examples():
    assert conj_length(normalize([a, b, A])) == 1
    assert conj_length(abelian(1, 3, -2)) == 5
    # brute force over all cyclic permutations gives 4 for the commutator
    u = normalize([a, b, A, B])
    assert conj_length(u) == 4 == brute_conj_length(u)


@given(raw_words())
def test_normalize_idempotent(raw):
    w = normalize(raw)
    assert normalize(list(w.syllables)) == w


@given(raw_words())
def test_normal_form_invariants(raw):
    syl = normalize(raw).syllables
    for x in syl:
        assert not (type(x) is AbelianSyllable and x.is_zero())
    for x, y in zip(syl, syl[1:]):
        if type(x) is FreeLetter:
            assert y is not x.inverse()
        else:
            assert not (type(y) is AbelianSyllable and y.factor == x.factor)


@given(words(), words(), words())
def test_concat_associative(u, v, w):
    assert concat(concat(u, v), w) == concat(u, concat(v, w))


@given(raw_words(), raw_words())
def test_concat_matches_normalize(x, y):
    assert concat(normalize(x), normalize(y)) == normalize(x + y)


@given(words(), words())
def test_length_bounds(u, v):
    assert word_length(concat(u, v)) <= word_length(u) + word_length(v)
    assert conj_length(u) <= word_length(u)


@given(words())
def test_invert_involution(u):
    assert invert(invert(u)) == u
    assert word_length(invert(u)) == word_length(u)


@given(words(), words())
def test_conj_length_conjugation_invariant(u, h):
    assert conj_length(concat(h, concat(u, invert(h)))) == conj_length(u)


@given(words())
def test_cyclic_reduce_decomposes(u):
    core, conj = cyclic_reduce(u)
    assert concat(conj, concat(core, invert(conj))) == u
    assert conj_length(core) == word_length(core)


@given(words(max_size=6))
def test_conj_length_matches_brute_force(u):
    assert conj_length(u) == brute_conj_length(u)


@given(raw_words(GroupSpec((3,), 0)))
def test_single_abelian_factor(raw):
    u = normalize(raw)
    assert conj_length(u) == word_length(u)


def test_letter_helper():
    assert letter(2, -1).syllables == (B,)
    assert MIXED.generators()[0] == letter(1)
