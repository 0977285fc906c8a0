"""Integer polynomials: factoring, polished roots, defining polynomials of moduli.

Coefficient tuples are integers, highest degree first.  Exact work
(factoring, resultants) goes through sympy; roots come from numpy's
companion eigenvalues and are polished by Newton steps in mpmath.
"""

from __future__ import annotations

from functools import lru_cache

import mpmath
import numpy as np
import sympy

_X, _Y = sympy.symbols("x y")
_DPS = 60


def _poly(coeffs) -> sympy.Poly:
    return sympy.Poly(list(coeffs), _X, domain="ZZ")


def _coeffs(p: sympy.Poly) -> tuple[int, ...]:
    c = tuple(int(a) for a in p.all_coeffs())
    if c and c[0] < 0:
        c = tuple(-a for a in c)
    return c


@lru_cache(maxsize=4096)
def irreducible_factors(coeffs: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Irreducible factors over Q with exact multiplicities (constants dropped)."""
    if len(coeffs) <= 1:
        return ()
    _, facs = _poly(coeffs).factor_list()
    out = [(_coeffs(f), m) for f, m in facs if f.degree() > 0]
    return tuple(sorted(out))


@lru_cache(maxsize=4096)
def squarefree_parts(coeffs: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Yun decomposition: squarefree polynomials s_m with p = prod s_m^m."""
    if len(coeffs) <= 1:
        return ()
    _, parts = _poly(coeffs).sqf_list()
    return tuple((_coeffs(f), m) for f, m in parts if f.degree() > 0)


def _newton(coeffs, z0, steps=60):
    with mpmath.workdps(_DPS):
        c = [mpmath.mpf(a) for a in coeffs]
        dc = [a * (len(c) - 1 - i) for i, a in enumerate(c[:-1])]
        z = mpmath.mpc(z0)
        for _ in range(steps):
            f = mpmath.polyval(c, z)
            df = mpmath.polyval(dc, z)
            if df == 0:
                break
            step = f / df
            z -= step
            if abs(step) <= mpmath.mpf(10) ** (-_DPS + 10) * max(1, abs(z)):
                break
        return complex(z)


@lru_cache(maxsize=4096)
def polished_roots(coeffs: tuple[int, ...]) -> tuple[complex, ...]:
    """Roots of a squarefree integer polynomial, Newton-polished in extended precision."""
    if len(coeffs) <= 1:
        return ()
    rough = np.roots(np.array(coeffs, dtype=float))
    out = []
    for r in rough:
        z = _newton(coeffs, complex(r))
        out.append(complex(float(z.real), float(z.imag)))
    return tuple(out)


def max_modulus(coeffs: tuple[int, ...]) -> float:
    """Largest root modulus of an irreducible factor of a unimodular matrix's polynomial.

    Snaps to exactly 1 when every root is on the unit circle (Kronecker: such
    a factor is cyclotomic).
    """
    roots = polished_roots(coeffs)
    m = max(abs(r) for r in roots)
    return 1.0 if m < 1 + 1e-9 else m


def is_cyclotomic(coeffs: tuple[int, ...]) -> bool:
    roots = polished_roots(coeffs)
    return abs(coeffs[-1]) == 1 and all(abs(abs(r) - 1) < 1e-9 for r in roots)


def _select_factor(candidates, value: float) -> tuple[int, ...]:
    mpmath.mp.dps = _DPS
    best, best_err = None, None
    for c in candidates:
        scale = sum(abs(a) * max(1.0, value) ** (len(c) - 1 - i) for i, a in enumerate(c))
        err = abs(float(mpmath.polyval([mpmath.mpf(a) for a in c], mpmath.mpf(value)))) / scale
        if best_err is None or err < best_err:
            best, best_err = c, err
    return best


@lru_cache(maxsize=4096)
def modulus_polynomial(q: tuple[int, ...], lam: float) -> tuple[int, ...]:
    """Irreducible integer polynomial vanishing at ``lam``, the largest root modulus of q.

    A real root contributes q or q(-x); for a non-real root, lam^2 is a
    product of two roots of q, so lam is a root of R(x^2) with
    R(x) = Res_y(q(y), y^n q(x/y)).
    """
    if lam == 1.0:
        return (1, -1)
    roots = polished_roots(q)
    top = [r for r in roots if abs(abs(r) - lam) <= 1e-9 * lam]
    real = [r for r in top if abs(r.imag) <= 1e-9 * lam]
    if any(r.real > 0 for r in real):
        return q
    if real:
        n = len(q) - 1
        return _coeffs(_poly([a * (-1) ** (n - i) for i, a in enumerate(q)]))
    n = len(q) - 1
    qy = sympy.Poly(list(q), _Y)
    # y^n q(x/y) = sum_i q_i x^(n-i) y^i
    rev = sympy.Poly(sum(a * _X ** (n - i) * _Y ** i for i, a in enumerate(q)), _Y)
    res = sympy.resultant(qy.as_expr(), rev.as_expr(), _Y)
    r2 = sympy.Poly(sympy.expand(res.subs(_X, _X ** 2)), _X, domain="ZZ")
    cands = [f for f, _ in irreducible_factors(_coeffs(r2))]
    return _select_factor(cands, lam)


def poly_eval_matrix_vector(coeffs, a, v):
    """p(A) v exactly, by Horner on vectors."""
    acc = tuple(0 for _ in v)
    for c in coeffs:
        acc = tuple(sum(x * y for x, y in zip(row, acc)) for row in a)
        acc = tuple(x + c * y for x, y in zip(acc, v))
    return acc


def format_poly(coeffs: tuple[int, ...], var: str = "x") -> str:
    return str(sympy.Poly(list(coeffs), sympy.Symbol(var)).as_expr())


@lru_cache(maxsize=4096)
def root_polynomial(q: tuple[int, ...], p: int, lam: float) -> tuple[int, ...]:
    """Irreducible polynomial of lam^(1/p), given that q is irreducible with root lam."""
    if p == 1:
        return q
    n = len(q) - 1
    # q(x^p): coefficient of x^(p*(n-i)) is q_i
    stretched = []
    for i, a in enumerate(q):
        stretched.append(a)
        if i < n:
            stretched.extend([0] * (p - 1))
    cands = [f for f, _ in irreducible_factors(tuple(stretched))]
    return _select_factor(cands, lam ** (1.0 / p))


def perron_root(m) -> tuple[float, tuple[int, ...]]:
    """Perron-Frobenius root of an irreducible non-negative integer matrix.

    Power iteration on M + I (aperiodic, same Perron vector), then the value
    is matched against the real roots of the characteristic polynomial and
    polished there.  Returns the root and its irreducible polynomial.
    """
    a = np.array(m, dtype=float)
    k = len(a)
    b = a + np.eye(k)
    v = np.ones(k) / k
    est = 0.0
    for _ in range(200000):
        w = b @ v
        s = w.sum()
        w /= s
        new = s - 1.0
        if abs(new - est) <= 1e-14 * max(1.0, abs(new)) and np.abs(w - v).max() <= 1e-13:
            est = new
            break
        est, v = new, w
    char = sympy.Matrix(m).charpoly(_X)
    best = None
    for q, _ in irreducible_factors(_coeffs(sympy.Poly(char.as_expr(), _X, domain="ZZ"))):
        for r in polished_roots(q):
            if abs(r.imag) <= 1e-9 * max(1.0, abs(r)):
                err = abs(r.real - est)
                if best is None or err < best[0]:
                    best = (err, r.real, q)
    if best is None or best[0] > 1e-9 * max(1.0, est):
        raise ArithmeticError(f"power iteration ({est!r}) does not match a characteristic root")
    return best[1], best[2]
