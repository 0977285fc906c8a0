"""Growth types (d, lambda), ordered by lambda first and then by d."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import total_ordering

LAMBDA_TOL = 1e-9


def lambda_close(x: float, y: float, tol: float = LAMBDA_TOL) -> bool:
    return abs(x - y) <= tol * max(abs(x), abs(y), 1.0)


@total_ordering
@dataclass(frozen=True, eq=False)
class GrowthType:
    """``n^d lambda^n``.

    ``poly`` optionally holds integer coefficients (highest degree first)
    of an irreducible polynomial having ``lam`` as a root.  Two types whose
    polynomials are both known compare their lambdas by polynomial identity
    plus a numeric check; otherwise a relative tolerance decides.
    """

    d: int
    lam: float
    poly: tuple[int, ...] | None = field(default=None, compare=False)
    tol: float = field(default=LAMBDA_TOL, compare=False, repr=False)

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("d must be non-negative")
        if not math.isfinite(self.lam) or self.lam < 1 - 1e-9:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "lam", max(float(self.lam), 1.0))

    # lambda comparison ----------------------------------------------------

    def same_lambda(self, other: GrowthType, tol: float | None = None) -> bool:
        tol = max(self.tol, other.tol) if tol is None else tol
        if self.poly is not None and other.poly is not None and tol <= 1e-6:
            if _normal_poly(self.poly) == _normal_poly(other.poly):
                # conjugate real roots of one polynomial are still distinct numbers
                return lambda_close(self.lam, other.lam, max(tol, 1e-7))
            return False
        return lambda_close(self.lam, other.lam, tol)

    def compare(self, other: GrowthType, tol: float | None = None) -> int:
        if self.same_lambda(other, tol):
            return (self.d > other.d) - (self.d < other.d)
        return -1 if self.lam < other.lam else 1

    def __eq__(self, other):
        if not isinstance(other, GrowthType):
            return NotImplemented
        return self.compare(other) == 0

    def __lt__(self, other):
        if not isinstance(other, GrowthType):
            return NotImplemented
        return self.compare(other) < 0

    def __hash__(self):
        # lambdas are compared with a tolerance, so only d can be hashed
        return hash(self.d)

    # helpers --------------------------------------------------------------

    @property
    def is_polynomial(self) -> bool:
        return lambda_close(self.lam, 1.0)

    def rescale(self, k: float) -> GrowthType:
        """(d, lambda^k); the polynomial is dropped since it changes."""
        poly = self.poly if self.is_polynomial else None
        return GrowthType(self.d, self.lam ** k, poly, self.tol)

    def bump(self) -> GrowthType:
        return GrowthType(self.d + 1, self.lam, self.poly, self.tol)

    def as_tuple(self) -> tuple[int, float]:
        return (self.d, self.lam)

    def __str__(self):
        return f"({self.d}, {format_lambda(self.lam)})"


def format_lambda(lam: float) -> str:
    if lam == 1.0:
        return "1"
    return f"{lam:.10g}"


def _normal_poly(p):
    p = list(p)
    while p and p[0] == 0:
        p.pop(0)
    if p and p[0] < 0:
        p = [-c for c in p]
    return tuple(p)


ONE = GrowthType(0, 1.0, (1, -1))


def gmax(*types: GrowthType) -> GrowthType:
    out = None
    for t in types:
        if out is None or t > out:
            out = t
    if out is None:
        raise ValueError("gmax of nothing")
    return out
