"""A JSON report over the whole bundled corpus; the output is deterministic."""

from __future__ import annotations

from polexp.autfile import format_automorphism
from polexp.cli import ct_report, fit_dict, spectrum_report
from polexp.corpus import examples
from polexp.fit import fit_growth
from polexp.spectrum import OrbitCache
from polexp.syntax import format_word

REPORT_BUDGET = 2_000_000


def corpus_report(n_max: int = 20, max_length: int = 3) -> dict:
    out = []
    for ex in examples():
        phi = ex.automorphism
        g = ex.probe_word
        cache = OrbitCache(phi, REPORT_BUDGET)
        probe = {"word": format_word(g, phi.spec)}
        for key, conj in (("element", False), ("class", True)):
            seq = cache.lengths(g, n_max, conj)
            probe[key] = {**fit_dict(fit_growth(seq)), "lengths": seq}
        entry = {"name": ex.name, "automorphism": format_automorphism(phi).splitlines(), "probe": probe}
        ok = True
        if ex.ct_map is not None:
            ct = ct_report(ex.ct_map, True, n_max, 0.02, REPORT_BUDGET)
            entry["ct"] = ct.data
            ok = ok and ct.code == 0
        sp = spectrum_report(phi, ex.ct_map, max_length, n_max, REPORT_BUDGET)
        entry["spectrum"] = sp.data
        ok = ok and sp.code == 0
        entry["consistent"] = ok
        out.append(entry)
    return {"n_max": n_max, "max_word_length": max_length, "examples": out}
