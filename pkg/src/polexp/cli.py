"""Command-line front end.

Exit codes: 0 success, 1 validation failure (bad input, failed cross-check
or oracle mismatch), 2 length budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

from polexp.abelian import minimal_poly_of_vector, orbit_growth, orbit_oracle, palangre_growth, palangre_oracle
from polexp.autfile import load_automorphism
from polexp.automorphism import (
    DEFAULT_BUDGET,
    Automorphism,
    TorusElement,
    palangre_left,
    palangre_right,
    torus_palangre,
)
from polexp.bridge import InducedMap
from polexp.ct import CtMap, polexp_sum
from polexp.ctfile import format_circuit, load_ct
from polexp.errors import LengthBudgetExceeded, ParseError, PolexpError, TooShort
from polexp.fit import MIN_TERMS, FittedGrowth, fit_growth, sequence_to_csv
from polexp.growth import GrowthType
from polexp.spectrum import (
    EMPIRICAL_TOL,
    OrbitCache,
    ct_combination_bound,
    enumerate_spectrum,
)
from polexp.syntax import format_word, parse_matrix, parse_vector, parse_word
from polexp.words import concat, invert, word_length

COMMANDS = ("element", "class", "palangre", "abelian", "ct", "spectrum", "sum", "corpus")
FITTING = ("element", "class", "palangre", "spectrum")
TORUS_CHECK_MAX = 8  # the mapping-torus product is slow, so only small n are cross-checked


@dataclass
class JobConfig:
    command: str
    aut: str | None = None
    ct: str | None = None
    word: str | None = None
    h: str | None = None
    matrix: str | None = None
    vector: str | None = None
    palangre: bool = False
    d: int = 0
    l1: float = 1.0
    l2: float = 1.0
    n_max: int = 30
    budget: int = DEFAULT_BUDGET
    fmt: str = "text"
    tol_lambda: float = 0.02
    oracle: bool = False
    k: int = 1
    max_length: int = 4

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.fmt not in ("text", "csv", "json"):
            raise ValueError(f"unknown format {self.fmt!r}")
        if self.command in FITTING and self.n_max < MIN_TERMS:
            raise ValueError(f"--n must be at least {MIN_TERMS} for fitting commands")
        if self.budget <= 0:
            raise ValueError("--budget must be positive")
        if self.k < 1:
            raise ValueError("--k must be at least 1")


@dataclass
class Report:
    code: int = 0
    data: dict = field(default_factory=dict)
    text: list[str] = field(default_factory=list)
    csv: str = ""

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return dumps(self.data)
        if fmt == "csv":
            return self.csv
        return "\n".join(self.text) + "\n"


# formatting -----------------------------------------------------------------

def num(x: float) -> float | int:
    """Round to 12 significant digits so reports are stable across platforms."""
    if isinstance(x, int):
        return x
    return float(f"{x:.12g}")


def _clean(obj):
    if isinstance(obj, float):
        return num(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(data) -> str:
    return json.dumps(_clean(data), indent=2, ensure_ascii=False) + "\n"


def type_dict(t: GrowthType) -> dict:
    out = {"d": t.d, "lambda": num(t.lam)}
    if t.poly is not None:
        out["polynomial"] = list(t.poly)
    return out


def fit_dict(f: FittedGrowth) -> dict:
    return {
        "d": f.d_hat,
        "lambda": num(f.lambda_hat),
        "residual": num(f.residual),
        "classification": f.classification,
        "window": list(f.window),
        "flags": list(f.flags),
    }


def short_type(d: int, lam: float) -> str:
    return f"({d}, {lam:.4g})" if abs(lam - 1) > 1e-12 else f"({d}, 1)"


def format_poly(coeffs: Sequence[int]) -> str:
    deg = len(coeffs) - 1
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        e = deg - i
        mono = "" if e == 0 else ("x" if e == 1 else f"x^{e}")
        mag = abs(c)
        body = str(mag) if e == 0 or mag != 1 else ""
        body = body + mono if body and mono else (body or mono)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _sequence_report(seq: list[int], n_max: int, fit: FittedGrowth | None, label: str, extra: dict) -> Report:
    r = Report()
    r.csv = sequence_to_csv(seq)
    r.data = dict(extra)
    r.data["lengths"] = seq
    r.data["complete"] = len(seq) == n_max + 1
    r.data["fit"] = fit_dict(fit) if fit else None
    r.text = [r.csv.rstrip("\n")]
    if fit is not None:
        r.text.append(f"{label} (d, λ) = {short_type(fit.d_hat, fit.lambda_hat)}"
                      f"  {fit.label()}  residual {fit.residual:.3g}"
                      + (f"  [{', '.join(fit.flags)}]" if fit.flags else ""))
    if len(seq) < n_max + 1:
        r.text.append(f"length budget exhausted after n = {len(seq) - 1}")
        r.code = 2
    return r


def _fit_or_none(seq) -> FittedGrowth | None:
    try:
        return fit_growth(seq)
    except TooShort:
        return None


# commands ---------------------------------------------------------------------

def _load_aut(cfg: JobConfig) -> Automorphism:
    from polexp.corpus import resolve

    if cfg.aut:
        return load_automorphism(resolve(cfg.aut))
    if cfg.ct:
        decl = load_ct(resolve(cfg.ct))
        if decl.automorphism_path is None:
            raise PolexpError("the CT file names no automorphism file")
        return InducedMap(decl.ct).with_inverse(load_automorphism(decl.automorphism_path))
    raise PolexpError("need --aut or --ct")


def _need(value, flag):
    if value is None:
        raise PolexpError(f"missing {flag}")
    return value


def _word(text, phi, flag):
    return parse_word(_need(text, flag), phi.spec, line=1, source=flag)


def cmd_orbit(cfg: JobConfig, conjugacy: bool) -> Report:
    phi = _load_aut(cfg)
    g = _word(cfg.word, phi, "--word")
    seq = OrbitCache(phi, cfg.budget).lengths(g, cfg.n_max, conjugacy)
    label = "class" if conjugacy else "element"
    extra = {"command": label, "word": format_word(g, phi.spec), "n_max": cfg.n_max}
    return _sequence_report(seq, cfg.n_max, _fit_or_none(seq), label, extra)


def cmd_palangre(cfg: JobConfig) -> Report:
    phi = _load_aut(cfg)
    g = _word(cfg.word, phi, "--word")
    h = _word(cfg.h if cfg.h is not None else "1", phi, "--h")
    phik = phi.power(cfg.k)
    seq = [0]
    left = right = parse_word("1", phi.spec)
    x, y = g, h
    exhausted = False
    for n in range(1, cfg.n_max + 1):
        try:
            left = concat(left, x)
            right = concat(y, right)
            if len(left) + len(right) > cfg.budget:
                raise LengthBudgetExceeded("palangre budget")
            seq.append(word_length(concat(left, right)))
            x = phik.apply(x, cfg.budget)
            y = phik.apply(y, cfg.budget)
        except LengthBudgetExceeded:
            exhausted = True
            break
    # cross-check against the mapping torus: alpha = g t^k, beta = h^-1 t^k
    checked = []
    alpha, beta = TorusElement(g, cfg.k), TorusElement(invert(h), cfg.k)
    for n in range(1, min(cfg.n_max, TORUS_CHECK_MAX, len(seq) - 1) + 1):
        try:
            via_torus = torus_palangre(alpha, beta, phi, n, cfg.budget)
            direct = concat(palangre_left(phik, g, n, cfg.budget), palangre_right(phik, h, n, cfg.budget))
        except LengthBudgetExceeded:
            break
        checked.append(n)
        if via_torus != direct:
            r = Report(code=1)
            r.text = [f"torus cross-check failed at n = {n}"]
            r.data = {"command": "palangre", "error": f"torus cross-check failed at n = {n}"}
            return r
    extra = {"command": "palangre", "word": format_word(g, phi.spec), "h": format_word(h, phi.spec),
             "k": cfg.k, "n_max": cfg.n_max, "torus_checked_up_to": max(checked, default=0)}
    r = _sequence_report(seq, cfg.n_max, _fit_or_none(seq), "palangre", extra)
    r.text.append(f"mapping torus cross-check passed for n <= {max(checked, default=0)}")
    if exhausted:
        r.code = 2
    return r


def cmd_abelian(cfg: JobConfig) -> Report:
    a = parse_matrix(_need(cfg.matrix, "--matrix"))
    v = parse_vector(_need(cfg.vector, "--vector"))
    t = palangre_growth(a, v) if cfg.palangre else orbit_growth(a, v)
    mp = minimal_poly_of_vector(a, v)
    r = Report()
    r.data = {"command": "abelian", "kind": "palangre" if cfg.palangre else "orbit",
              "matrix": [list(row) for row in a], "vector": list(v),
              "growth": type_dict(t), "minimal_polynomial": list(mp.coefficients)}
    r.text = [f"(d, λ) = {t}"]
    if t.poly is not None:
        r.text.append(f"λ is a root of {format_poly(t.poly)}")
    r.text.append(f"minimal polynomial of v: {format_poly(mp.coefficients)}")
    if cfg.oracle:
        seq = (palangre_oracle if cfg.palangre else orbit_oracle)(a, v, cfg.n_max)
        f = fit_growth(seq)
        ok = f.d_hat == t.d and abs(f.lambda_hat / t.lam - 1) <= cfg.tol_lambda
        r.data["oracle"] = {"fit": fit_dict(f), "agrees": ok}
        r.text.append(f"oracle fit {short_type(f.d_hat, f.lambda_hat)}: {'agrees' if ok else 'DISAGREES'}")
        r.csv = sequence_to_csv(seq)
        if not ok:
            r.code = 1
    else:
        r.csv = "d,lambda\n" + f"{t.d},{num(t.lam)}\n"
    return r


def ct_report(ct: CtMap, oracle: bool, n_max: int, tol: float, budget: int) -> Report:
    g = ct.graph
    table = ct.growth_table
    r = Report()
    strata = [{"height": s.height, "kind": s.kind, "label": s.label(),
               "edges": [g.edge(e).name for e in s.edges],
               "lambda": num(s.lam), **({"polynomial": list(s.poly)} if s.poly else {})}
              for s in ct.strata]
    edges = [{"edge": g.edge(e).name, "height": g.edge(e).height, "growth": type_dict(table.edges[e])}
             for e in sorted(table.edges)]
    terms = []
    for kind, d in (("inp", table.inps), ("exceptional", table.exceptional), ("connecting", table.connecting)):
        terms.extend({"term": name, "kind": kind, "growth": type_dict(t)} for name, t in sorted(d.items()))
    r.text = ["strata:"]
    r.text += [f"  {s['height']:>3}  {s['label']:<18} {' '.join(s['edges'])}" for s in strata]
    r.text.append("edge growth:")
    r.text += [f"  {e['edge']:<8} {table.edges[i]}" for e, i in zip(edges, sorted(table.edges))]
    if terms:
        r.text.append("other terms:")
        r.text += [f"  {t['term']:<8} {t['kind']:<12} ({t['growth']['d']}, {t['growth']['lambda']})"
                   for t in terms]
    csv_rows = ["item,kind,d,lambda"]
    csv_rows += [f"{e['edge']},edge,{e['growth']['d']},{e['growth']['lambda']}" for e in edges]
    csv_rows += [f"{t['term']},{t['kind']},{t['growth']['d']},{t['growth']['lambda']}" for t in terms]
    circuits = []
    if ct.circuits:
        r.text.append("circuits:")
    for name, (c, sc) in ct.circuits.items():
        pred = ct.circuit_growth(c, sc)
        item = {"circuit": name, "path": format_circuit(g, c), "predicted": type_dict(pred)}
        line = f"  {name:<8} {pred}"
        if oracle:
            seq = ct.circuit_lengths(c, n_max, budget, truncate=True)
            f = _fit_or_none(seq)
            if f is None:
                item["oracle"] = {"terms": len(seq), "fit": None, "agrees": None}
                line += f"  oracle: budget hit after {len(seq) - 1} steps"
                r.code = max(r.code, 2)
            else:
                ok = f.d_hat == pred.d and abs(f.lambda_hat / pred.lam - 1) <= tol
                item["oracle"] = {"terms": len(seq), "fit": fit_dict(f), "agrees": ok}
                line += f"  oracle {short_type(f.d_hat, f.lambda_hat)} {'ok' if ok else 'MISMATCH'}"
                if not ok:
                    r.code = 1
        circuits.append(item)
        r.text.append(line)
        csv_rows.append(f"{name},circuit,{pred.d},{num(pred.lam)}")
    r.data = {"command": "ct", "name": ct.name, "strata": strata, "edges": edges, "terms": terms,
              "circuits": circuits}
    r.csv = "\n".join(csv_rows) + "\n"
    return r


def cmd_ct(cfg: JobConfig) -> Report:
    from polexp.corpus import resolve

    decl = load_ct(resolve(_need(cfg.ct, "--ct")))
    return ct_report(decl.ct, cfg.oracle, cfg.n_max, cfg.tol_lambda, cfg.budget)


def spectrum_report(phi: Automorphism, ct: CtMap | None, max_length: int, n_max: int, budget: int) -> Report:
    emp = enumerate_spectrum(phi, max_length, n_max, budget)
    r = Report()
    entries = []
    for i, t in enumerate(emp.spectrum):
        ws = [format_word(w, phi.spec) for w in emp.witnesses.get(i, [])]
        entries.append({"d": t.d, "lambda": num(t.lam), "witnesses": ws})
    r.data = {"command": "spectrum", "max_word_length": max_length, "n_max": n_max,
              "empirical_lower_bound": entries,
              "skipped": [{"word": format_word(w, phi.spec), "reason": why} for w, why in emp.skipped]}
    r.text = [f"empirical spectrum (a lower bound, {len(emp.fits)} classes fitted):"]
    for e in entries:
        sample = ", ".join(e["witnesses"][:3]) + (", ..." if len(e["witnesses"]) > 3 else "")
        r.text.append(f"  {short_type(e['d'], e['lambda'])}  {len(e['witnesses'])} classes: {sample}")
    if emp.skipped:
        r.text.append(f"skipped {len(emp.skipped)} classes (budget)")
    r.csv = "d,lambda,witnesses\n" + "".join(f"{e['d']},{e['lambda']},{len(e['witnesses'])}\n" for e in entries)
    if ct is not None:
        bound = ct_combination_bound(ct)
        outside = [t for t in emp.spectrum if not bound.member(t, EMPIRICAL_TOL)]
        r.data["combination_bound"] = [type_dict(t) for t in bound]
        r.data["contained"] = not outside
        r.text.append("combination bound: " + str(bound))
        r.text.append("contained" if not outside else "NOT contained: " + ", ".join(map(str, outside)))
        if outside:
            r.code = 1
    return r


def cmd_spectrum(cfg: JobConfig) -> Report:
    from polexp.corpus import resolve

    phi = _load_aut(cfg)
    ct = load_ct(resolve(cfg.ct)).ct if cfg.ct else None
    return spectrum_report(phi, ct, cfg.max_length, cfg.n_max, cfg.budget)


def cmd_sum(cfg: JobConfig) -> Report:
    t = polexp_sum(cfg.d, cfg.l1, cfg.l2)
    r = Report()
    r.data = {"command": "sum", "d": cfg.d, "lambda1": num(cfg.l1), "lambda2": num(cfg.l2),
              "growth": type_dict(t)}
    r.text = [str(t)]
    r.csv = f"d,lambda\n{t.d},{num(t.lam)}\n"
    return r


def cmd_corpus(cfg: JobConfig) -> Report:
    from polexp.corpus.report import corpus_report

    data = corpus_report(n_max=cfg.n_max, max_length=cfg.max_length)
    r = Report(data=data)
    r.text = [f"{e['name']}: probe {e['probe']['word']} element {short_type(e['probe']['element']['d'], e['probe']['element']['lambda'])}"
              f" class {short_type(e['probe']['class']['d'], e['probe']['class']['lambda'])}"
              for e in data["examples"]]
    r.csv = "name,element_d,element_lambda,class_d,class_lambda\n" + "".join(
        f"{e['name']},{e['probe']['element']['d']},{e['probe']['element']['lambda']},"
        f"{e['probe']['class']['d']},{e['probe']['class']['lambda']}\n" for e in data["examples"])
    if any(not e.get("consistent", True) for e in data["examples"]):
        r.code = 1
    return r


def run(cfg: JobConfig) -> Report:
    """Run one job; errors become a report with the matching exit code."""
    try:
        cfg.validate()
        if cfg.command == "element":
            return cmd_orbit(cfg, False)
        if cfg.command == "class":
            return cmd_orbit(cfg, True)
        if cfg.command == "palangre":
            return cmd_palangre(cfg)
        if cfg.command == "abelian":
            return cmd_abelian(cfg)
        if cfg.command == "ct":
            return cmd_ct(cfg)
        if cfg.command == "spectrum":
            return cmd_spectrum(cfg)
        if cfg.command == "sum":
            return cmd_sum(cfg)
        return cmd_corpus(cfg)
    except LengthBudgetExceeded as exc:
        return _error(2, f"length budget exhausted: {exc}")
    except ParseError as exc:
        return _error(1, f"parse error: {exc}")
    except OSError as exc:
        return _error(1, f"cannot read {exc.filename}: {exc.strerror}")
    except ValueError as exc:
        return _error(1, str(exc))
    except (PolexpError, ArithmeticError) as exc:
        return _error(1, f"{type(exc).__name__}: {exc}")


def _error(code: int, message: str) -> Report:
    return Report(code=code, data={"error": message}, text=[message], csv="")


# argument parsing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polexp", description="PolExp growth of automorphisms and CT maps.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_default=30):
        sp.add_argument("--n", type=int, default=n_default, dest="n_max", help="largest iterate (default %(default)s)")
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="length budget in syllables")
        sp.add_argument("--format", choices=("text", "csv", "json"), default="text", dest="fmt")
        sp.add_argument("--tol-lambda", type=float, default=0.02, help="relative lambda tolerance for comparisons")
        sp.add_argument("--oracle", action="store_true", help="compare with brute-force iteration")
        sp.add_argument("--k", type=int, default=1, help="palangre power")

    for name, helptext in (("element", "|phi^n(g)|"), ("class", "||phi^n(g)||")):
        sp = sub.add_parser(name, help=f"lengths {helptext} and their fitted growth")
        sp.add_argument("--aut")
        sp.add_argument("--ct", help="use the automorphism induced by this CT file")
        sp.add_argument("--word", required=True)
        common(sp)
    sp = sub.add_parser("palangre", help="|L_n(phi^k, g) R_n(phi^k, h)| with a mapping torus cross-check")
    sp.add_argument("--aut")
    sp.add_argument("--ct")
    sp.add_argument("--word", "--g", dest="word", required=True)
    sp.add_argument("--h", default=None, help="right palangre element (default 1)")
    common(sp, 20)
    sp = sub.add_parser("abelian", help="exact growth of A^n v or of its palangre")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--vector", required=True)
    sp.add_argument("--palangre", action="store_true")
    common(sp)
    sp = sub.add_parser("ct", help="growth table and circuit predictions of a CT file")
    sp.add_argument("--ct", required=True)
    common(sp, 25)
    sp = sub.add_parser("spectrum", help="empirical spectrum and, with --ct, the combination bound")
    sp.add_argument("--aut")
    sp.add_argument("--ct")
    sp.add_argument("--max-length", type=int, default=4, dest="max_length")
    common(sp, 25)
    sp = sub.add_parser("sum", help="growth of sum_k (n-k)^d l1^k l2^(n-k)")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--l1", type=float, required=True)
    sp.add_argument("--l2", type=float, required=True)
    sp.add_argument("--format", choices=("text", "csv", "json"), default="text", dest="fmt")
    sp = sub.add_parser("corpus", help="report on every bundled example")
    sp.add_argument("--max-length", type=int, default=3, dest="max_length")
    common(sp, 20)
    return p


def config_from_args(argv: Sequence[str] | None = None) -> JobConfig:
    ns = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(ns).items() if v is not None}
    return JobConfig(**fields)


def main(argv: Sequence[str] | None = None) -> int:
    cfg = config_from_args(argv)
    report = run(cfg)
    out = report.render(cfg.fmt)
    if "error" in report.data:
        sys.stderr.write(f"polexp: {report.data['error']}\n")
        if cfg.fmt == "json":
            sys.stdout.write(out)
    else:
        try:
            sys.stdout.write(out)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); silence the flush at exit
            sys.stdout = open(os.devnull, "w")
        if report.code == 2:
            sys.stderr.write("polexp: length budget exhausted, results are partial\n")
    return report.code


if __name__ == "__main__":
    sys.exit(main())
