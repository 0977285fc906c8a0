import math
import random

import pytest
from hypothesis import given, strategies as st

from polexp.bridge import InducedMap
from polexp.corpus import examples
from polexp.ct import (
    Circuit,
    SplitCircuit,
    Term,
    assign_growth_types,
    circuit_growth,
    circuit_length,
    classify_strata,
    f_sharp,
    fat_turn_growth,
    is_tight,
    make_path,
    path_length,
    polexp_sum,
    reverse_path,
    tighten,
    vertex_stabilization_power,
)
from polexp.ctfile import parse_ct
from polexp.errors import NotCompletelySplit, StrataInvalid
from polexp.fit import fit_growth
from polexp.growth import GrowthType
from polexp.spectrum import OrbitCache

PHI = (1 + math.sqrt(5)) / 2
CT_EXAMPLES = [e for e in examples() if e.ct]


def ct_of(text):
    return parse_ct(text).ct


FAT = """
group { abelian 2 }
vertex v fat g1
edge a : v -> v height 1
edge b : v -> v height 2
matrix g1 = %s
image a -> a g1[1,0]
image b -> g1[-1,0] b
"""

INP = """
vertex v
edge a : v -> v height 1
edge b : v -> v height 2
edge c : v -> v height 3
image a -> a
image b -> b · a
image c -> c · a
inp s = b C
"""


def random_path(ct, rng, size, elem_range=2):
    g = ct.graph
    v = rng.randrange(len(g.vertices))
    start, edges, elems = v, [], [_rand_elem(g, v, rng, elem_range)]
    for _ in range(size):
        choices = [oe for i in range(1, len(g.edges) + 1) for oe in (i, -i) if g.origin(oe) == v]
        if not choices:
            break
        e = rng.choice(choices)
        edges.append(e)
        v = g.terminus(e)
        elems.append(_rand_elem(g, v, rng, elem_range))
    return make_path(g, start, edges, elems)


def _rand_elem(g, v, rng, r):
    k = g.rank_at(v)
    if not k or rng.random() < 0.5:
        return (0,) * k
    return tuple(rng.randint(-r, r) for _ in range(k))


def word(ct, path):
    return InducedMap(ct).group.path_word(path)


# tightening ---------------------------------------------------------------------

def test_tighten_examples():
    ct = ct_of(FAT % "[[1,0],[0,1]]")
    g = ct.graph
    assert tighten(make_path(g, 0, (1, -1))).edges == ()
    p = make_path(g, 0, (1, 2), [(0, 0), (3, 0), (0, 0)])
    assert tighten(p) == p
    p = make_path(g, 0, (1, -1), [(0, 0), (1, 2), (0, 0)])
    assert tighten(p) == p
    p = make_path(g, 0, (2, 1, -1, -2), [(1, 0), (0, 0), (0, 0), (0, 0), (0, 5)])
    t = tighten(p)
    assert t.edges == () and t.elems == ((1, 5),)


@given(st.integers(0, 10 ** 6), st.integers(0, 12))
def test_tighten_idempotent_and_homotopic(seed, size):
    rng = random.Random(seed)
    ct = ct_of(FAT % "[[2,1],[1,1]]")
    p = random_path(ct, rng, size)
    t = tighten(p)
    assert is_tight(t)
    assert tighten(t) == t
    assert word(ct, t) == word(ct, p)
    assert (t.start, t.end) == (p.start, p.end)


# lengths ------------------------------------------------------------------------

def test_path_length_examples():
    ct = ct_of(FAT % "[[1,0],[0,1]]")
    g = ct.graph
    assert path_length(make_path(g, 0, (1,))) == 1
    p = make_path(g, 0, (1, 2), [(9, 9), (2, -1), (7, 0)])
    assert path_length(p) == 5
    q = make_path(g, 0, (1, 2), [(0, 0), (2, -1), (0, 0)])
    assert path_length(q) == 5
    assert circuit_length(Circuit(0, (1, 2), ((2, -1), (0, 1)))) == 2 + 3 + 1


# f_sharp ------------------------------------------------------------------------

def test_f_sharp_of_inp_is_equivalent():
    ct = ct_of(INP)
    s = ct.inps["s"]
    img = f_sharp(ct, s)
    assert img.equivalent(s)
    for _ in range(12):
        s = f_sharp(ct, s)
        assert path_length(s) == 2


@pytest.mark.parametrize("e", CT_EXAMPLES, ids=lambda e: e.name)
def test_inp_lengths_constant(e):
    ct = e.ct_map
    for p in ct.inps.values():
        assert ct.path_lengths(p, 12) == [path_length(p)] * 13


def test_exceptional_exponent_drift():
    ct = next(e.ct_map for e in CT_EXAMPLES if e.name == "exceptional")
    x = ct.exceptional["x"]
    w_len = path_length(x.w)
    for p0 in (0, 2, 5):
        path = ct.term_path(Term("exc", "x", False, p0))
        target = ct.term_path(Term("exc", "x", False, p0 + x.d - x.d2))
        assert f_sharp(ct, path).equivalent(target)
        seq = ct.path_lengths(path, 12)
        slope = abs(x.d - x.d2) * w_len
        # exponent p -> p - 1 until it passes zero, then grows again
        assert seq == [2 + abs(p0 - n) * slope for n in range(13)]


@given(st.integers(0, 10 ** 6), st.integers(1, 6))
def test_f_sharp_functorial(seed, size):
    rng = random.Random(seed)
    e = CT_EXAMPLES[seed % len(CT_EXAMPLES)]
    ct = e.ct_map
    p = tighten(random_path(ct, rng, size))
    once = f_sharp(ct, f_sharp(ct, p))
    twice = tighten(ct.f_raw(ct.f_raw(p)))
    assert once == twice
    # images never climb above the height of the input
    if p.edges:
        h = max(ct.graph.edge(x).height for x in p.edges)
        assert all(ct.graph.edge(x).height <= h for x in once.edges)


@given(st.integers(0, 10 ** 6), st.integers(1, 6))
def test_f_sharp_matches_automorphism(seed, size):
    rng = random.Random(seed)
    e = CT_EXAMPLES[seed % len(CT_EXAMPLES)]
    ct = e.ct_map
    p = random_path(ct, rng, size)
    base = InducedMap(ct).group
    # close the path through the tree so it reads as an element of the fundamental group
    loop = tighten(_close(ct, base, p))
    assert word(ct, f_sharp(ct, loop)) == e.automorphism.apply(word(ct, loop))


def _close(ct, group, p):
    from polexp.ct import join
    g = ct.graph
    return join(g, group.tree_path(p.start), p, reverse_path(group.tree_path(p.end)))


# strata ---------------------------------------------------------------------------

def _ct(name):
    return next(e.ct_map for e in CT_EXAMPLES if e.name == name)


def test_classify_strata_examples():
    (s,) = classify_strata(_ct("fib"))
    assert s.kind == "EG" and s.lam == pytest.approx(PHI, rel=1e-12)
    assert s.lam ** 2 - s.lam - 1 == pytest.approx(0, abs=1e-12)
    a, b = classify_strata(_ct("bg_outer"))
    assert a.label() == "NEG(fixed)"
    assert b.label() == "NEG(linear)"
    kinds = [s.kind for s in classify_strata(_ct("zero_stratum"))]
    assert kinds == ["NEG", "Zero", "EG"]


@pytest.mark.parametrize("text", [
    # reducible matrix in one stratum
    "vertex v\nedge a : v -> v height 1\nedge b : v -> v height 1\nimage a -> a\nimage b -> b a\n",
    # NEG edge whose image does not start with itself
    "vertex v\nedge a : v -> v height 1\nedge b : v -> v height 2\nimage a -> a\nimage b -> a b\n",
    # image climbing to a higher stratum
    "vertex v\nedge a : v -> v height 1\nedge b : v -> v height 2\nimage a -> a b\nimage b -> b\n",
])
def test_invalid_strata(text):
    with pytest.raises(StrataInvalid):
        parse_ct(text)


def test_zero_stratum_must_avoid_fat_vertices():
    text = ("group { abelian 1 }\nvertex v\nvertex w fat g1\nedge y : w -> v height 1\n"
            "edge z : w -> v height 2\nedge b : v -> v height 3\n"
            "image y -> y\nimage z -> y\nimage b -> b · Y · z\n")
    with pytest.raises(StrataInvalid, match="fat vertex"):
        parse_ct(text)


def test_vertex_stabilization_power_examples():
    assert vertex_stabilization_power((0, 1, 2)) == 1
    assert vertex_stabilization_power((1, 0)) == 2
    assert vertex_stabilization_power((1, 2, 3, 3)) == 3
    assert vertex_stabilization_power((1, 2, 0, 4, 3)) == 6
    for e in CT_EXAMPLES:
        assert e.ct_map.vertex_stabilization_power >= 1


@given(st.lists(st.integers(0, 5), min_size=6, max_size=6))
def test_vertex_stabilization_power_brute(vm):
    p = vertex_stabilization_power(vm)

    def power(v, k):
        for _ in range(k):
            v = vm[v]
        return v

    def good(k):
        return all(power(power(v, k), k) == power(v, k) for v in range(6))

    assert good(p)
    assert not any(good(k) for k in range(1, p))


# fat turns ------------------------------------------------------------------------

def test_fat_turn_growth_examples():
    a, b = Term("edge", 1), Term("edge", 2)
    ident = ct_of(FAT % "[[1,0],[0,1]]")
    assert fat_turn_growth(ident, (a, (0, 0), b)) == GrowthType(0, 1.0)
    assert fat_turn_growth(ident, (a, (4, -1), b)) == GrowthType(0, 1.0)
    assert fat_turn_growth(ident, (a, (0, 0), a)).as_tuple() == (1, 1.0)
    cat = ct_of(FAT % "[[2,1],[1,1]]")
    g = fat_turn_growth(cat, (a, (0, 0), a))
    assert g.d == 0 and g.lam == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-9)


def test_fat_turn_matches_palangre_oracle():
    from polexp.abelian import palangre_growth
    cat = ct_of(FAT % "[[2,1],[1,1]]")
    a = Term("edge", 1)
    assert fat_turn_growth(cat, (a, (0, 0), a)) == palangre_growth(((2, 1), (1, 1)), (1, 0))
    seq = cat.circuit_lengths(Circuit(0, (1, 1), ((0, 0), (0, 0))), 25)
    f = fit_growth(seq)
    assert f.lambda_hat == pytest.approx((3 + math.sqrt(5)) / 2, rel=0.02)


# growth assignment ------------------------------------------------------------------

def test_assign_growth_types_examples():
    t = assign_growth_types(_ct("fib"))
    assert all(g.d == 0 and g.lam == pytest.approx(PHI, abs=1e-9) for g in t.edges.values())
    t = assign_growth_types(_ct("neg_tower"))
    assert [t.edges[i].as_tuple() for i in (1, 2, 3)] == [(0, 1.0), (1, 1.0), (2, 1.0)]
    t = assign_growth_types(_ct("eg_over_eg"))
    assert all(t.edges[i].lam == pytest.approx(PHI) and t.edges[i].d == 0 for i in (3, 4, 5))
    t = assign_growth_types(_ct("eg_bump"))
    assert [t.edges[i].d for i in (3, 4)] == [1, 1]
    t = assign_growth_types(_ct("exceptional"))
    assert t.exceptional["x"].as_tuple() == (1, 1.0)


def test_inp_table_entry():
    t = assign_growth_types(ct_of(INP))
    assert t.inps["s"].as_tuple() == (0, 1.0)
    assert t.edges[2].as_tuple() == (1, 1.0)


def test_circuit_growth_examples():
    ct = ct_of(INP)
    s = ct.inps["s"]
    c = Circuit(0, s.edges, (s.interior[0], (0,) * 0))
    assert circuit_growth(ct, c).as_tuple() == (0, 1.0)
    fib = _ct("fib")
    g = circuit_growth(fib, fib.circuits["ab"][0])
    assert g.d == 0 and g.lam == pytest.approx(PHI)


def test_bad_declared_splitting():
    fib = _ct("fib")
    c = fib.circuits["ab"][0]
    with pytest.raises(NotCompletelySplit):
        circuit_growth(fib, c, SplitCircuit((Term("edge", 1), Term("edge", 1)), ((), ())))


CIRCUITS = [(e, name) for e in CT_EXAMPLES for name in e.ct_map.circuits]


@pytest.mark.parametrize("e,name", CIRCUITS, ids=lambda x: x if isinstance(x, str) else x.name)
def test_prediction_matches_oracle(e, name):
    ct = e.ct_map
    c, split = ct.circuits[name]
    want = circuit_growth(ct, c, split)
    seq = ct.circuit_lengths(c, 25, budget=400_000, truncate=True)
    assert len(seq) >= 16
    f = fit_growth(seq)
    assert f.d_hat == want.d
    assert f.lambda_hat == pytest.approx(want.lam, rel=0.02)


@pytest.mark.parametrize("e,name", CIRCUITS, ids=lambda x: x if isinstance(x, str) else x.name)
def test_conjugacy_class_transfer(e, name):
    ct = e.ct_map
    c, _ = ct.circuits[name]
    g = InducedMap(ct).group.circuit_word(c)
    seq = ct.circuit_lengths(c, 25, budget=400_000, truncate=True)
    via_graph = fit_growth(seq)
    via_group = fit_growth(OrbitCache(e.automorphism).lengths(g, len(seq) - 1))
    assert via_graph.d_hat == via_group.d_hat
    assert via_graph.lambda_hat == pytest.approx(via_group.lambda_hat, rel=0.02)


# sums --------------------------------------------------------------------------------

def test_polexp_sum_examples():
    assert polexp_sum(0, 1, 1).as_tuple() == (1, 1.0)
    assert polexp_sum(3, 2, 1).as_tuple() == (0, 2.0)
    assert polexp_sum(2, 1, 1.5).as_tuple() == (2, 1.5)
    with pytest.raises(ValueError):
        polexp_sum(0, 0.5, 1)


@pytest.mark.parametrize("d,l1,l2", [(1, 1.5, 1.5), (2, 2, 1), (0, 1, 2)])
def test_polexp_sum_against_partial_sums(d, l1, l2):
    from fractions import Fraction
    f1, f2 = Fraction(l1), Fraction(l2)
    seq = [math.floor(sum((n - k) ** d * f1 ** k * f2 ** (n - k) for k in range(1, n + 1)))
           for n in range(61)]
    want = polexp_sum(d, l1, l2)
    got = fit_growth(seq)
    assert got.d_hat == want.d
    assert got.lambda_hat == pytest.approx(want.lam, rel=0.01)
