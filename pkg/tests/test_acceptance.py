"""Acceptance criteria AC1-AC9, each with its runtime budget.

Run with pytest (a summary line per criterion is printed at the end of the
session) or directly with ``python tests/test_acceptance.py``.
"""

import time

import pytest

from qeuclid.cli import main
from qeuclid.ncalg import check_confluence, get_rules
from qeuclid.radial import derive_radial_constants, polynomial_crosscheck, radial_induction_report
from qeuclid.report import VerifyReport
from qeuclid.suites import run_suite

RESULTS: dict = {}


def record(name, ok, seconds, budget, note=""):
    within = seconds < budget
    RESULTS[name] = f"{name} {'PASS' if ok and within else 'FAIL'}  {seconds:.2f}s (budget {budget:g}s){'  ' + note if note else ''}"
    return ok and within


def failures(rep: VerifyReport) -> str:
    return ", ".join(c.check_id for c in rep.failures)


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_ac1_structure():
    reps, dt = timed(lambda: [run_suite("structure", N=N) for N in (3, 4, 5)])
    ok = all(r.passed for r in reps)
    n = sum(len(r.checks) for r in reps)
    assert record("AC1", ok, dt, 30, f"{n} exact checks, N=3,4,5"), [failures(r) for r in reps]


def test_ac2_golden_relations():
    rep, dt = timed(lambda: run_suite("golden"))
    bad = failures(rep)
    ok = record("AC2", rep.passed, dt, 1, f"failing: {bad}" if bad else f"{len(rep.checks)} relations")
    assert ok, [(c.check_id, c.details) for c in rep.failures]


def test_ac3_confluence():
    rep, dt = timed(lambda: check_confluence(get_rules(3), max_len=4, samples=200, sample_len=6))
    words = sum(c.details["words"] for c in rep.checks)
    mism = sum(c.details["mismatches"] for c in rep.checks)
    note = f"{words} words (all of length <= 4, 200 random of length 6), {mism} mismatches"
    assert record("AC3", rep.passed, dt, 120, note), failures(rep)


def test_ac4_calculus():
    def go():
        rep = run_suite("calculus", N=3)
        rep.extend(run_suite("hodge", N=4))
        return rep

    rep, dt = timed(go)
    assert record("AC4", rep.passed, dt, 300, f"{len(rep.checks)} checks"), failures(rep)


def test_ac5_harmonics():
    rep, dt = timed(lambda: run_suite("harmonics", N=3, lmax=4, max_degree=6))
    assert record("AC5", rep.passed, dt, 120, f"{len(rep.checks)} checks"), failures(rep)


def test_ac6_radial():
    def go():
        rep = polynomial_crosscheck(3, 6)
        rep.extend(radial_induction_report(3))
        return rep

    rep, dt = timed(go)
    rc = derive_radial_constants(3)
    assert record("AC6", rep.passed, dt, 60, f"k={rc.k}, c={rc.c}"), failures(rep)


def test_ac7_stokes():
    rep, dt = timed(lambda: run_suite("stokes", N=3))
    worst = max(c.details.get("rel_err", 0.0) for c in rep.checks)
    assert record("AC7", rep.passed, dt, 60, f"max relative residual {worst:.1e}"), failures(rep)


def test_ac8_hermiticity():
    rep, dt = timed(lambda: run_suite("hermiticity", N=3, q=1.2))
    worst = max(c.details.get("rel_err", 0.0) for c in rep.checks)
    pairs = sum(1 for c in rep.checks if c.check_id.startswith("hermiticity[") and c.status == "pass")
    assert record("AC8", rep.passed, dt, 120, f"{pairs} identities, max relative error {worst:.1e}"), failures(rep)


def test_ac9_parser_and_reports(tmp_path, capsys):
    def go():
        rep = run_suite("parser")
        codes = {
            "pass": main(["verify", "--suite", "structure"]),
            "fail": main(["verify", "--suite", "golden"]),
            "usage": main(["normalize", "x[9]"]),
        }
        anchored = all(c.anchor for name in ("structure", "golden", "parser", "hodge") for c in run_suite(name).checks)
        return rep, codes, anchored

    (rep, codes, anchored), dt = timed(go)
    capsys.readouterr()
    ok = rep.passed and codes == {"pass": 0, "fail": 1, "usage": 2} and anchored
    assert record("AC9", ok, dt, 10, f"exit codes {codes}"), (failures(rep), codes, anchored)


@pytest.fixture(scope="module", autouse=True)
def _summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    lines = [RESULTS[k] for k in sorted(RESULTS)]
    if reporter is not None:
        reporter.write_sep("-", "acceptance criteria")
        for line in lines:
            reporter.write_line(line)
    else:
        print("\n".join(lines))


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
