"""Acceptance criteria 1-12 at their stated tolerances, on the full budget profile.

Each test prints one PASS/FAIL line; the lines are repeated in the terminal
summary so they appear even when output is captured.
"""
import json
import subprocess
import sys
import time

from slicelab import suite

PROFILE = "full"
SEED = 7
RESULTS: dict = {}


def report(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[num] = line
    print(line)


def run_check(num, fn, **kw):
    t0 = time.perf_counter()
    chk = fn(SEED, PROFILE, **kw)
    seconds = time.perf_counter() - t0
    worst = "n/a" if chk.worst_margin is None else f"{chk.worst_margin:.3g}"
    report(num, chk.passed, f"{chk.name}: {len(chk.instances)} instances, worst margin {worst}, "
                            f"{len(chk.failures)} failures, {seconds:.1f}s")
    return chk, seconds


def test_criterion_01_spherical_identity():
    chk, seconds = run_check(1, suite.check_spherical_identity)
    assert len(chk.instances) == 3 * 3 * 20
    assert chk.passed, chk.failures[:3]
    assert seconds < 10.0


def test_criterion_02_polar_volume():
    chk, seconds = run_check(2, suite.check_polar_volume)
    assert len(chk.instances) == 4 * 5
    assert chk.passed, chk.failures[:3]
    assert seconds < 60.0


def test_criterion_03_section_moment_equality():
    chk, _ = run_check(3, suite.check_section_moment_equality)
    assert len(chk.instances) == 9
    assert chk.passed, chk.failures[:3]


def test_criterion_04_section_moment_random():
    chk, _ = run_check(4, suite.check_section_moment_random)
    assert len(chk.instances) == 100
    assert chk.passed, chk.failures[:3]


def test_criterion_05_monotonicity():
    chk, _ = run_check(5, suite.check_monotonic_q)
    assert len(chk.instances) >= 200
    assert chk.passed, chk.failures[:3]


def test_criterion_06_central_slicing_bound():
    chk, _ = run_check(6, suite.check_slicing_bound)
    assert max(len(r["inputs"]["body"].get("axes", [])) or r["inputs"]["body"]["n"] for r in chk.instances) == 6
    assert chk.passed, chk.failures[:3]


def test_criterion_07_moment_ratio():
    chk, _ = run_check(7, suite.check_moment_ratio)
    assert {r["inputs"]["p"] for r in chk.instances} == {1.0, 2.0, 4.0, 8.0}
    assert all("ratio" in r for r in chk.instances)
    assert chk.passed, chk.failures[:3]


def test_criterion_08_slicing_ratio():
    chk, _ = run_check(8, suite.check_slicing_ratio)
    asserted = [r for r in chk.instances if r["asserted"]]
    assert {r["inputs"]["p"] for r in asserted} == {3.0, 4.0, 8.0}
    assert chk.passed, chk.failures[:3]


def test_criterion_09_comparison():
    chk, _ = run_check(9, suite.check_comparison)
    assert len(chk.instances) == 100
    assert chk.passed, chk.failures[:3]


def test_criterion_10_distances():
    chk, _ = run_check(10, suite.check_distances)
    assert chk.passed, chk.failures[:3]


def test_criterion_11_spot_values():
    chk, _ = run_check(11, suite.check_spot_values)
    assert chk.passed, chk.failures[:3]


def test_criterion_12_cli_determinism():
    cmd = [sys.executable, "-m", "slicelab.cli", "verify-suite", "--seed", "7"]
    t0 = time.perf_counter()
    first = subprocess.run(cmd, capture_output=True)
    seconds = time.perf_counter() - t0
    second = subprocess.run(cmd, capture_output=True)
    same = first.stdout == second.stdout and len(first.stdout) > 0
    summary = json.loads(first.stdout)["results"]
    ok = same and first.returncode == 0 and summary["checks_executed"] >= 12
    report(12, ok, f"verify-suite --seed 7 twice: identical={same}, exit={first.returncode}, "
                   f"checks={summary['checks_executed']}, quick profile {seconds:.1f}s")
    assert same
    assert first.returncode == 0, first.stderr.decode()[-2000:]
    assert summary["checks_executed"] >= 12
    assert seconds <= 120.0

