import io
import json

import pytest

from ahplus.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_kappa_pass():
    code, out = run("verify", "kappa")
    assert code == 0
    assert "PASS" in out


def test_printed_gauge_fails_with_location():
    code, out = run("verify", "gauge", "--variant", "printed")
    assert code == 1
    assert "c-3" in out


def test_eval_value_and_expect():
    code, out = run("eval", "rrho", "*", "* b *", "--expect", "b(1)")
    assert code == 0
    code, _ = run("eval", "rrho", "*", "* b *", "--expect=-b(1)")
    assert code == 1


def test_eval_inconsistent_boundary():
    code, _ = run("eval", "U", "zz", "b")
    assert code == 2


def test_bad_arguments():
    assert run("verify", "nonsense")[0] == 2
    assert run("fusion", "check", "no-such-ring")[0] == 2
    assert run("fusion", "compat", "z2.bimodules", "regular")[0] == 2


def test_budget_exceeded():
    code, _ = run("--budget", "0.01", "verify", "alpha-classes")
    assert code == 3


def test_bp_compat_skipped():
    code, out = run("verify", "bp-compat")
    assert code == 0
    assert "data not transcribed" in out


def test_fusion_commands():
    assert run("fusion", "check", "ah4")[0] == 0
    assert run("fusion", "enumerate", "z2", "--brute")[0] == 0
    code, out = run("fusion", "compat", "z2.bimodules", "regular", "regular", "--expect", "point,regular,left,right")
    assert code == 0
    code, _ = run("fusion", "compat", "z2.bimodules", "regular", "regular", "--expect", "regular")
    assert code == 1


def test_fp_weights():
    code, out = run("fp-weights", "ahp1.principal")
    assert code == 0
    assert "e = (4+sqrt17)" in out


def test_report_is_deterministic(tmp_path):
    docs = []
    for k in range(2):
        p = tmp_path / f"r{k}.json"
        assert run("--report", str(p), "verify", "lemma")[0] == 0
        doc = json.loads(p.read_text())
        doc.pop("wall_time")
        docs.append(json.dumps(doc, sort_keys=True))
    assert docs[0] == docs[1]
    doc = json.loads(docs[0])
    assert doc["schema"] == "ahplus-report/1"
    wit = doc["checks"][0]["witnesses"]["rrho1"]
    assert set(wit) == {"expr", "decimal"}
    assert sum(ch.isdigit() for ch in wit["decimal"]) == 50


@pytest.mark.parametrize("prec", ["16", "200"])
def test_precision_flag(prec):
    assert run("--precision", prec, "verify", "duality")[0] == 0
