"""One test per acceptance criterion.  Each prints a PASS/FAIL line and checks
its result through a second, independent route where one exists."""

import time

import mpmath
import numpy as np
import pytest
import sympy

from ahplus import ahp1, beta, parse_scalar
from ahplus.assets import load_asset
from ahplus.connections import classify_phase_connections, find_vertical_gauge
from ahplus.fusion import build_ah4_ring, check_ring, enumerate_modules, enumerate_rings, fp_dims
from ahplus.intertwiners import evaluate_map, parse_diagram

from conftest import mp_beta
from fusion_oracles import canonical_module, canonical_ring, modules_brute, pf_dims, rings_up_to_rank
from oracles import biunitary_defect, orthogonal_defect
from test_connections import _orbit_count


@pytest.fixture
def line(capsys):
    def emit(n, ok, text):
        status = ok if isinstance(ok, str) else "PASS" if ok else "FAIL"
        with capsys.disabled():
            print(f"\n[criterion {n}] {status}: {text}")

    return emit


class Clock:
    def __enter__(self):
        self.t = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.s = time.monotonic() - self.t


def test_c01_kappa_biunitary(line):
    with Clock() as c:
        rep = ahp1.verify_kappa()
    oracle = biunitary_defect(ahp1.kappa())
    ok = rep.passed and oracle < 1e-12 and c.s < 10
    line(1, ok, f"kappa exact {rep.checked} checks, {rep.notes[-1]}; float oracle defect {oracle:.1e}; {c.s:.1f}s")
    assert rep.passed, rep.failures
    assert oracle < 1e-12
    assert c.s < 10


def test_c02_appendix_unitarity(line):
    with Clock() as c:
        rep = ahp1.verify_appendix_unitarity("corrected")
    lg = load_asset("ahp1.appendixA-corrected.gauge")
    census = lg.census()
    oracle = max(orthogonal_defect(M) for _, M in lg.matrices())
    ok = rep.passed and rep.checked == 53 and census == {1: 25, 2: 14, 3: 10, 4: 3, 5: 1} and oracle < 1e-12 and c.s < 30
    line(2, ok, f"{rep.checked - len(rep.failures)}/{rep.checked} unitary, census {census}; float oracle {oracle:.1e}; {c.s:.1f}s")
    assert ok


def test_c03_gauge(line):
    with Clock() as c:
        rep = ahp1.verify_gauge_data("corrected")
        T, info = find_vertical_gauge(ahp1.rak(), ahp1.arak())
    w = ahp1.w_map()
    entries = [(side, s, t, x) for side in ("left", "right") for s, col in w.side(side).items() for t, x in col.items()]
    sign_match = all(T.coeff(side, t, s) == -x for side, s, t, x in entries)
    printed = ahp1.verify_gauge_data("printed")
    located = any("c-3" in str(f) for f in printed.failures)
    corr = load_asset("ahp1.appendixA-corrected.gauge")
    ok = rep.passed and sign_match and located and c.s < 300
    line(
        3,
        ok,
        f"corrected data verifies ({rep.checked} checks); solved gauge = -printed on {len(entries)} entries; "
        f"as-printed fails at c-3; {c.s:.1f}s",
    )
    assert rep.passed, rep.failures[:5]
    assert sign_match and located
    assert corr is not None
    assert c.s < 300


def test_c04_alpha_classes(line):
    with Clock() as c:
        rep = ahp1.verify_alpha_classes()
    fg = ahp1.alpha().fg
    brute = _orbit_count(fg)
    ok = rep.passed and brute == len(classify_phase_connections(fg)) == 2 and c.s < 300
    line(4, ok, f"{'; '.join(rep.notes)}; brute-force orbit count {brute}; {c.s:.1f}s")
    assert ok, rep.failures


def test_c05_lemma(line):
    with Clock() as c:
        rows = ahp1.lemma_coefficients(ahp1.model())
    b1, b2 = mp_beta(1), mp_beta(2)
    printed = {
        "b(1)": b1,
        "1": mpmath.mpf(1),
        "b(2)*sqrt(b(1)/2)": b2 * mpmath.sqrt(b1 / 2),
        "-b(2)*sqrt(b(1)/2)": -b2 * mpmath.sqrt(b1 / 2),
        "sqrt(b(1)/2)": mpmath.sqrt(b1 / 2),
        "-1/sqrt(b(1))": -1 / mpmath.sqrt(b1),
        "sqrt(b(1))/b(2)": mpmath.sqrt(b1) / b2,
        "-sqrt(b(1))/b(2)": -mpmath.sqrt(b1) / b2,
        "sqrt(b(1))": mpmath.sqrt(b1),
        "-sqrt(b(1))": -mpmath.sqrt(b1),
    }
    expected = {item: printed[text] for item, _, _, _, text in ahp1.LEMMA}
    as_printed = [r.item for r in rows if r.ok]
    flipped = [r.item for r in rows if not r.ok and r.ok_w_flipped]
    numeric = all(
        abs(abs(mpmath.mpf(r.value.decimal(40))) - abs(expected[r.item])) < 1e-30 for r in rows if r.value is not None
    )
    ok = len(as_printed) + len(flipped) == len(ahp1.LEMMA) and numeric and c.s < 120
    line(5, ok, f"{len(as_printed)} as printed, {len(flipped)} with w -> -w ({', '.join(flipped)}); {c.s:.1f}s")
    assert ok


def test_c06_relations(line):
    with Clock() as c:
        reps = ahp1.verify_relations(ahp1.model(), dims=True)
    b1 = mp_beta(1)
    refs = {"1": b1, "2": -mpmath.sqrt(b1), "3": b1**2 / 2}
    rels = ahp1.relations()
    values_ok = True
    for rel in rels[:3]:
        for p in rel.probes:
            got = mpmath.mpf(parse_scalar(p.expected).decimal(40))
            values_ok &= abs(abs(got) - abs(refs[rel.name])) < 1e-30
    status = [("flagged" if r.flagged else "pass" if r.passed else "fail") for r in reps]
    ok = status == ["pass", "pass", "pass", "flagged"] and values_ok and c.s < 300
    dims = [n for r in reps for n in r.notes if n.startswith("dim")]
    line(6, ok, f"relations 1-4: {status}; {'; '.join(dims)}; {c.s:.1f}s")
    assert ok, [r.failures for r in reps]


def test_c07_duality(line):
    with Clock() as c:
        rep = ahp1.verify_duality()
    m = ahp1.model()
    zig = True
    for text in ("r, id(kappa)\nid(kappa), rbar~\n", "id(kappabar), r\nrbar~, id(kappabar)\n"):
        for side in ("left", "right"):
            mp = evaluate_map(parse_diagram(text, m), m, side)
            zig &= all(row == {top: 1} for top, row in mp.items())
    ok = rep.passed and rep.checked == 25 and zig
    line(7, ok, f"r.rbar = 1/beta on {rep.checked} vertex pairs; zig-zag diagrams evaluate to the identity; {c.s:.1f}s")
    assert ok, rep.failures


def test_c08_fusion_exactness(line):
    r = build_ah4_ring()
    rep = check_ring(r)
    d = fp_dims(r)["a0x"]
    one = parse_scalar("1")
    identity = (one + d) / 2 * (one + d) == one + 5 * d
    ref = pf_dims([[list(x) for x in y] for y in r.N])[4]
    s = sympy.Integer(4) + sympy.sqrt(17)
    sym = sympy.expand((1 + s) / 2 * (1 + s) - (1 + 5 * s)) == 0
    ok = rep.passed and d == parse_scalar("4+sqrt17") and identity and abs(ref - float(d)) < 1e-9 and sym
    line(8, ok, f"AH4 axioms ({rep.checked} checks); dim(xi) = {d}; ((1+d)/2)(1+d) = 1+5d exactly")
    assert ok


def test_c09_enumeration_oracle(line):
    with Clock() as c:
        rings = enumerate_rings(3, 3)
        same_rings = {canonical_ring([[list(x) for x in y] for y in r.N]) for r in rings} == rings_up_to_rank(3, 3)
        bad, skipped = [], []
        for r in rings:
            mods = enumerate_modules(r, 3)
            N = [[list(x) for x in y] for y in r.N]
            for n in (1, 2, 3):
                ref = modules_brute(N, r.dual, r.unit, n, 300_000)
                if ref is None:
                    skipped.append(f"{r.name}@{n}")
                    continue
                if {canonical_module(m.mats) for m in mods if m.rank == n} != ref:
                    bad.append(f"{r.name}@{n}")
    ok = same_rings and not bad and not skipped and c.s < 600
    line(9, ok, f"{len(rings)} rings, module ranks 1-3: {len(bad)} mismatches, {len(skipped)} uncovered; {c.s:.1f}s")
    assert ok, (bad, skipped)


def test_c10_compatibility_reproduction(line):
    with pytest.raises(Exception):
        load_asset("ah1-ah4.bimodules.fusion")
    line(10, "SKIPPED", "data not transcribed (criterion 9 stands in)")
    pytest.skip("data not transcribed")
