"""Every acceptance criterion at its stated tolerance, one PASS/FAIL line each."""

import time

import pytest

from orlicz_greedy.acceptance import CHECKS
from orlicz_greedy.cli import main, write_selftest_csv

RUNTIME_BUDGET_S = 300.0


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    results, elapsed = {}, 0.0
    for k in sorted(CHECKS):
        t0 = time.perf_counter()
        results[k] = CHECKS[k]()
        elapsed += time.perf_counter() - t0
    path = tmp_path_factory.mktemp("selftest") / "first.csv"
    write_selftest_csv([results[k] for k in sorted(results)], path)
    return results, elapsed, path


def _report(capsys, check, extra=""):
    with capsys.disabled():
        metrics = ", ".join(f"{k}={v:.6g}" for k, v in sorted(check.metrics.items()))
        print(f"\n{check.line()}{extra}\n    {metrics}")


@pytest.mark.parametrize("criterion", range(1, 10))
def test_criterion(suite, criterion, capsys):
    check = suite[0][criterion]
    _report(capsys, check)
    assert check.passed, check.metrics


def test_criterion_10_determinism_and_runtime(suite, tmp_path, capsys):
    results, elapsed, first = suite
    second = tmp_path / "second.csv"
    rc = main(["selftest", "--out", str(second)])
    identical = first.read_bytes() == second.read_bytes()
    within = elapsed < RUNTIME_BUDGET_S
    check = results[10]
    check.require(identical and within)
    check.record("suite_runtime_s_lt_300", within)
    check.record("selftest_csv_identical", identical)
    _report(capsys, check, f" (suite {elapsed:.1f} s)")
    assert rc == (0 if all(c.passed for k, c in results.items() if k != 10) else 1)
    assert identical and within and check.passed
