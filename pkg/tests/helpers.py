"""Strategies, random generators and brute-force oracles shared by the tests."""

import random

from hypothesis import strategies as st

from polexp.intmat import identity_matrix, mat_mul
from polexp.words import AbelianSyllable, FreeLetter, GroupSpec, normalize

MIXED = GroupSpec((2,), 2)  # Z^2 * F_2

ACCEPTANCE: dict[int, str] = {}  # criterion number -> PASS/FAIL line, filled by test_acceptance


def syllables(spec: GroupSpec, max_coord: int = 3):
    options = []
    if spec.free_rank:
        options.append(st.builds(FreeLetter, st.integers(1, spec.free_rank), st.sampled_from([1, -1])))
    for j, k in enumerate(spec.abelian_ranks, start=1):
        options.append(st.builds(AbelianSyllable, st.just(j),
                                 st.tuples(*[st.integers(-max_coord, max_coord)] * k)))
    return st.one_of(*options)


def raw_words(spec: GroupSpec = MIXED, max_size: int = 8):
    return st.lists(syllables(spec), max_size=max_size)


def words(spec: GroupSpec = MIXED, max_size: int = 8):
    return raw_words(spec, max_size).map(normalize)


def random_word(rng: random.Random, spec: GroupSpec, size: int):
    raw = []
    for _ in range(size):
        if spec.abelian_ranks and (not spec.free_rank or rng.random() < 0.3):
            j = rng.randint(1, spec.num_factors)
            raw.append(AbelianSyllable(j, tuple(rng.randint(-2, 2) for _ in range(spec.rank(j)))))
        else:
            raw.append(FreeLetter(rng.randint(1, spec.free_rank), rng.choice([1, -1])))
    return normalize(raw)


def elementary(k: int, rng: random.Random):
    """A random elementary matrix in GL(k, Z): a sign flip, a swap or a transvection."""
    m = [list(r) for r in identity_matrix(k)]
    kind = rng.random()
    i, j = rng.sample(range(k), 2) if k > 1 else (0, 0)
    if k == 1 or kind < 0.1:
        m[i][i] = -1
    elif kind < 0.2:
        m[i], m[j] = m[j], m[i]
    else:
        m[i][j] = rng.choice([-1, 1])
    return tuple(map(tuple, m))


def random_gl(k: int, rng: random.Random, max_factors: int = 12):
    a = identity_matrix(k)
    for _ in range(rng.randint(1, max_factors)):
        a = mat_mul(a, elementary(k, rng))
    return a


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def brute_conj_length(u) -> int:
    """min |h u h^-1| over cyclic permutations of the syllable list, each fully normalized.

    Independent of cyclic_reduce: it only uses normalize on rotated raw lists,
    repeated until the length stops changing.
    """
    from polexp.words import word_length

    best = word_length(u)
    frontier = [u]
    seen = set()
    while frontier:
        w = frontier.pop()
        key = repr(w)
        if key in seen:
            continue
        seen.add(key)
        syl = list(w.syllables)
        for i in range(1, len(syl)):
            r = normalize(syl[i:] + syl[:i])
            best = min(best, word_length(r))
            frontier.append(r)
    return best


def mixed_elementary(rng: random.Random):
    """A random elementary automorphism of Z^2 * F_2 together with its inverse."""
    from polexp.automorphism import Automorphism
    from polexp.words import IDENTITY, concat, invert, letter

    spec = MIXED
    gens = [letter(1), letter(2)]
    free, inv_free = list(gens), list(gens)
    mat = inv_mat = ((1, 0), (0, 1))
    conj = inv_conj = IDENTITY
    kind = rng.randrange(5)
    i = rng.randrange(2)
    x = gens[i]
    if kind == 0:
        y = gens[1 - i] if rng.random() < 0.5 else invert(gens[1 - i])
        if rng.random() < 0.5:
            free[i], inv_free[i] = concat(x, y), concat(x, invert(y))
        else:
            free[i], inv_free[i] = concat(y, x), concat(invert(y), x)
    elif kind == 1:
        t = normalize([AbelianSyllable(1, (rng.randint(-2, 2), rng.randint(-2, 2)))])
        free[i], inv_free[i] = concat(x, t), concat(x, invert(t))
    elif kind == 2:
        m = elementary(2, rng)
        mat = m
        # elementary matrices are involutions or transvections; invert exactly
        inv_mat = _inverse_2x2(m)
    elif kind == 3:
        c = x if rng.random() < 0.5 else invert(x)
        conj, inv_conj = c, invert(c)
    else:
        free[i] = inv_free[i] = invert(x)
    return Automorphism(spec, tuple(free), (mat,), (conj,), tuple(inv_free), (inv_mat,), (inv_conj,))


def _inverse_2x2(m):
    (p, q), (r, s) = m
    det = p * s - q * r
    return ((s * det, -q * det), (-r * det, p * det))


def random_mixed_automorphism(rng: random.Random, moves: int = 4):
    from polexp.automorphism import Automorphism

    phi = Automorphism.identity(MIXED)
    for _ in range(moves):
        phi = mixed_elementary(rng).compose(phi)
    return phi
