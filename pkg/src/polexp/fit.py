"""Empirical growth-type estimation for integer length sequences.

The model is  ln a_n ~ c + d ln n + n ln(lambda)  on a tail window.  All
three parameters are fitted jointly, d is snapped to a neighbouring integer
and the remaining two are refitted; fitting ln(lambda) alone first would
absorb d/n into the exponential rate and bias both estimates.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from polexp.errors import TooShort
from polexp.growth import GrowthType

MIN_TERMS = 12


@dataclass(frozen=True)
class FitOptions:
    eps_lambda: float = 0.02
    window_fraction: float = 1 / 3  # window starts at ceil(fraction * n_max)
    min_window: int = 8
    d_max: int = 12
    low_confidence_residual: float = 0.5
    # a larger d must cut the log residual by this factor to be preferred
    parsimony: float = 0.5
    # exact quasi-polynomial detection
    max_period: int = 12
    checks: int = 5
    # exact linear-recurrence detection and extension (0 disables)
    max_recurrence: int = 10
    min_pairs: int = 6
    extend_to: int = 400
    extended_window_fraction: float = 1 / 3
    # recurrence up to rounding (floored exact sums); only tried on large terms
    near_recurrence_tol: float = 1e-9
    near_recurrence_min: int = 10 ** 9


@dataclass(frozen=True)
class FittedGrowth:
    d_hat: int
    lambda_hat: float
    residual: float
    classification: str  # "Bounded" | "Polynomial" | "Exponential"
    window: tuple[int, int]
    constant: float = 1.0
    flags: tuple[str, ...] = field(default=())

    @property
    def growth_type(self) -> GrowthType:
        return GrowthType(self.d_hat, self.lambda_hat, tol=0.02)

    @property
    def low_confidence(self) -> bool:
        return "low-confidence" in self.flags

    def label(self) -> str:
        if self.classification == "Bounded":
            return "Bounded"
        if self.classification == "Polynomial":
            return f"Polynomial({self.d_hat})"
        return f"Exponential({self.d_hat}, {self.lambda_hat:.6g})"

    def as_dict(self) -> dict:
        return {
            "d": self.d_hat,
            "lambda": _fmt(self.lambda_hat),
            "residual": _fmt(self.residual),
            "classification": self.classification,
            "window": list(self.window),
            "flags": list(self.flags),
        }

    def __str__(self):
        return f"({self.d_hat}, {self.lambda_hat:.6g})"


def _fmt(x: float) -> float:
    return float(f"{x:.12g}")


def _window(n_max: int, opts: FitOptions) -> tuple[int, int]:
    lo = math.ceil(opts.window_fraction * n_max)
    lo = max(1, min(lo, n_max - opts.min_window + 1))
    return lo, n_max


def quasi_polynomial_degree(seq: Sequence[int], max_period: int, d_max: int, checks: int) -> tuple[int, int] | None:
    """(degree, period) if the sequence ends as an exact quasi-polynomial, else None.

    Tests whether the (D+1)-fold step-P difference vanishes on the last
    ``checks`` admissible positions, for the smallest period P first.
    """
    n = len(seq)
    for period in range(1, max_period + 1):
        # differences are local, so the tail of each level only depends on the tail of seq
        diffs = list(seq[-((d_max + 1) * period + checks):])
        for degree in range(d_max + 1):
            if (degree + 1) * period + checks > n:
                break
            diffs = [b - a for a, b in zip(diffs, diffs[period:])]
            if not any(diffs[-checks:]):
                return degree, period
    return None


def find_recurrence(seq: Sequence[int], max_order: int, checks: int) -> tuple[Fraction, ...] | None:
    """Shortest rational recurrence a_n = sum_j c_j a_{n-j} holding exactly on the tail.

    The r coefficients are solved from r equations and confirmed on
    ``checks`` further terms; integer data makes accidental fits negligible.
    """
    n = len(seq)
    for r in range(1, max_order + 1):
        need = 2 * r + checks
        if need > n:
            return None
        tail = list(seq[n - need:])
        rows = [tail[i:i + r][::-1] + [tail[i + r]] for i in range(r + checks)]
        coeffs = _solve(rows[:r], r)
        if coeffs is None:
            continue
        den = math.lcm(*(c.denominator for c in coeffs))
        num = [int(c * den) for c in coeffs]
        if all(sum(c * x for c, x in zip(num, row[:r])) == den * row[r] for row in rows[r:]):
            return tuple(coeffs)
    return None


def find_near_recurrence(seq: Sequence[int], max_order: int, checks: int, rel_tol: float,
                         min_value: int, separation: float = 1.05) -> tuple[Fraction, ...] | None:
    """Shortest recurrence holding up to relative error ``rel_tol`` on a tail of large terms.

    Meant for floored values of an exact recurrence, where the noise is at
    most a unit.  Least-squares coefficients are only trusted when the
    dominant characteristic root is real, positive and exceeds every other
    root modulus by the factor ``separation``: a repeated or clustered top
    root moves by a root of the noise level and would drift on extension.
    """
    n = len(seq)
    for r in range(1, max_order + 1):
        need = 2 * r + checks
        if need > n or min(seq[n - need:]) < min_value:
            return None
        tail = list(seq[n - need:])
        scale = max(tail)
        # int / int division gives correctly rounded floats even for huge terms
        a = np.array([[x / scale for x in tail[i:i + r][::-1]] for i in range(r + checks)])
        b = np.array([tail[i + r] / scale for i in range(r + checks)])
        w = 1.0 / b
        coeffs, *_ = np.linalg.lstsq(a * w[:, None], np.ones_like(b), rcond=None)
        if np.max(np.abs(a @ coeffs - b) * w) > rel_tol:
            continue
        roots = sorted(np.roots(np.concatenate([[1.0], -coeffs])), key=abs, reverse=True)
        top = roots[0]
        if abs(top.imag) > 1e-9 or top.real <= 1 or (r > 1 and abs(top) < separation * abs(roots[1])):
            return None
        return tuple(Fraction(float(c)) for c in coeffs)
    return None


def _solve(rows, r):
    """Solve the r x r system given as integer augmented rows (fraction-free)."""
    m = [[int(x) for x in row] for row in rows]
    prev = 1
    for col in range(r):
        piv = next((i for i in range(col, r) if m[i][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for i in range(col + 1, r):
            m[i] = [(m[col][col] * m[i][k] - m[i][col] * m[col][k]) // prev for k in range(r + 1)]
        prev = m[col][col]
    x = [Fraction(0)] * r
    for i in range(r - 1, -1, -1):
        acc = Fraction(m[i][r]) - sum(m[i][k] * x[k] for k in range(i + 1, r))
        x[i] = acc / m[i][i]
    return x


def extend_by_recurrence(seq: Sequence[int], coeffs, length: int, rounding: bool = False) -> list[int]:
    """Continue ``seq`` to ``length`` terms; with ``rounding`` new terms are floored instead of exact."""
    den = math.lcm(*(Fraction(c).denominator for c in coeffs))
    num = [int(Fraction(c) * den) for c in coeffs]
    out = [int(a) for a in seq]
    while len(out) < length:
        acc = sum(c * out[-1 - j] for j, c in enumerate(num))
        q, rem = divmod(acc, den)
        if (rem and not rounding) or q < 0:
            raise ValueError("recurrence leaves the non-negative integers")
        out.append(q)
    return out


def _upper_hull(xs, zs):
    hull: list[tuple[float, float]] = []
    for p in zip(xs, zs):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def envelope_rate(ns, z) -> float:
    """Slope of the upper-hull edge above the window centre.

    Dominant complex eigenvalues make ln a_n oscillate in a band; the top of
    the band is approached again and again, so the upper envelope gives a
    far steadier rate than least squares on a short window.
    """
    hull = _upper_hull(list(ns), list(z))
    if len(hull) == 1:
        return 0.0
    centre = float(np.mean(ns))
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= centre <= x2:
            return (y2 - y1) / (x2 - x1)
    (x1, y1), (x2, y2) = hull[-2], hull[-1]
    return (y2 - y1) / (x2 - x1)


def near_period_rate(z, min_pairs: int) -> float:
    """Mean of (z_{m+q} - z_m)/q for the lag q whose ratios agree best.

    A rotation by an angle theta nearly repeats after q steps when q theta
    is close to a multiple of pi; comparing terms one near-period apart
    cancels most of the oscillation.  All lags are scored at once from
    prefix sums and the autocorrelation of the detrended sequence.
    """
    z = np.asarray(z, dtype=float)
    n = len(z)
    if n - min_pairs < 1:
        return envelope_rate(np.arange(n, dtype=float), z)
    idx = np.arange(n, dtype=float)
    slope, icpt = np.polyfit(idx, z, 1)
    w = z - (icpt + slope * idx)
    s1 = np.concatenate(([0.0], np.cumsum(w)))
    s2 = np.concatenate(([0.0], np.cumsum(w * w)))
    ac = np.correlate(w, w, mode="full")[n - 1:]
    q = np.arange(1, n - min_pairs + 1)
    cnt = n - q
    total = (s1[n] - s1[q]) - s1[n - q]
    sq = (s2[n] - s2[q]) + s2[n - q] - 2 * ac[q]
    mean = total / cnt
    var = np.maximum(sq / cnt - mean * mean, 0.0)
    spread = np.sqrt(var) / q
    k = int(np.argmin(spread))
    return float(mean[k] / q[k] + slope)


def _fit_fixed_d(ns, y, d, eps_log, min_pairs):
    """c and mu for y - d ln n ~ c + mu n; returns (c, mu, half band width)."""
    z = y - d * np.log(ns)
    mu = near_period_rate(z, min_pairs)
    if mu < eps_log:
        mu = 0.0
    resid = z - mu * ns
    top, bottom = float(resid.max()), float(resid.min())
    return (top + bottom) / 2, float(mu), (top - bottom) / 2


def _finish(seq, d, c, mu, lo, hi, opts, flags):
    tail = seq[lo:hi + 1]
    residual = max(
        abs(math.expm1(math.log(max(a, 1)) - c - d * math.log(n) - mu * n))
        for n, a in zip(range(lo, hi + 1), tail)
    )
    if residual > opts.low_confidence_residual:
        flags.append("low-confidence")
    if d == 0 and mu == 0.0:
        cls = "Bounded"
    elif mu == 0.0:
        cls = "Polynomial"
    else:
        cls = "Exponential"
        if any(b < a for a, b in zip(tail, tail[1:])):
            flags.append("non-monotone")
    return FittedGrowth(d, math.exp(mu), residual, cls, (lo, hi), math.exp(c), tuple(flags))


def fit_growth(sequence: Sequence[int], options: FitOptions | None = None) -> FittedGrowth:
    opts = options or FitOptions()
    seq = [int(a) for a in sequence]
    if len(seq) < MIN_TERMS:
        raise TooShort(f"need at least {MIN_TERMS} terms, got {len(seq)}")
    if any(a < 0 for a in seq):
        raise ValueError("lengths must be non-negative")
    n_max = len(seq) - 1
    lo, hi = _window(n_max, opts)
    tail = seq[lo:hi + 1]
    flags: list[str] = []
    if not any(tail):
        return FittedGrowth(0, 1.0, 0.0, "Bounded", (lo, hi), 0.0, ("degenerate",))
    ns = np.arange(lo, hi + 1, dtype=float)
    # math.log handles integers beyond float range
    y = np.array([math.log(max(a, 1)) for a in tail])
    eps_log = math.log1p(opts.eps_lambda)

    qp = quasi_polynomial_degree(seq, opts.max_period, opts.d_max, opts.checks)
    if qp is not None:
        d = qp[0]
        flags.append(f"quasi-polynomial period {qp[1]}")
        if d == 0:
            c = float((y.max() + y.min()) / 2)
        else:
            z = y - d * np.log(ns)
            c = float((z.max() + z.min()) / 2)
        return _finish(seq, d, c, 0.0, lo, hi, opts, flags)

    rec = find_recurrence(seq, opts.max_recurrence, opts.checks) if opts.max_recurrence else None
    near = False
    if rec is None and opts.max_recurrence and opts.near_recurrence_tol > 0:
        rec = find_near_recurrence(seq, opts.max_recurrence, opts.checks, opts.near_recurrence_tol,
                                   opts.near_recurrence_min)
        near = rec is not None
    if rec is not None and opts.extend_to > len(seq):
        try:
            longer = extend_by_recurrence(seq, rec, opts.extend_to, rounding=near)
        except ValueError:
            longer = None
        if longer is not None:
            inner = replace(opts, max_recurrence=0, window_fraction=opts.extended_window_fraction)
            f = fit_growth(longer, inner)
            kind = "near recurrence" if near else "recurrence"
            flags.append(f"{kind} order {len(rec)}, extended to n = {opts.extend_to - 1}")
            c = math.log(f.constant) if f.constant > 0 else 0.0
            mu = math.log(f.lambda_hat)
            return _finish(seq, f.d_hat, c, mu, lo, hi, opts, flags + list(f.flags))

    design = np.vstack([np.ones_like(ns), np.log(ns), ns]).T
    (_, d_raw, _), *_ = np.linalg.lstsq(design, y, rcond=None)
    lo_d = min(max(0, math.floor(d_raw)), opts.d_max)
    cands = sorted({0, lo_d, min(lo_d + 1, opts.d_max)})
    fits = {d: _fit_fixed_d(ns, y, d, eps_log, opts.min_pairs) for d in cands}
    best = cands[0]
    for d in cands[1:]:
        if fits[d][2] < opts.parsimony * fits[best][2]:
            best = d
    c, mu, _ = fits[best]
    return _finish(seq, best, c, mu, lo, hi, opts, flags)


def check_power_consistency(
    sequence_phi: Sequence[int],
    sequence_phik: Sequence[int],
    k: int,
    tol: float = 0.03,
    options: FitOptions | None = None,
) -> bool:
    f1 = fit_growth(sequence_phi, options)
    fk = fit_growth(sequence_phik, options)
    if f1.d_hat != fk.d_hat:
        return False
    target = f1.lambda_hat ** k
    return abs(fk.lambda_hat - target) <= tol * target


# I/O --------------------------------------------------------------------

def sequence_to_csv(seq: Sequence[int]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "length"])
    for n, a in enumerate(seq):
        w.writerow([n, a])
    return buf.getvalue()


def sequence_from_csv(text: str) -> list[int]:
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and set(rows[0]) != {"n", "length"}:
        raise ValueError("expected header n,length")
    rows.sort(key=lambda r: int(r["n"]))
    ns = [int(r["n"]) for r in rows]
    if ns != list(range(len(ns))):
        raise ValueError("n must run 0, 1, 2, ... without gaps")
    return [int(r["length"]) for r in rows]


def fit_to_json(fit: FittedGrowth) -> str:
    return json.dumps(fit.as_dict())
