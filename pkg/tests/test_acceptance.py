"""The ten acceptance criteria at their stated tolerances.

Criteria 1 to 9 run once per session; criterion 10 reruns the whole suite
with the same seed and compares the printed lines.  One PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import pytest

from splinedeconv.verify import VerifyConfig, determinism_result, format_result, run_suite

LINES: list[str] = []


@pytest.fixture(scope="session")
def first_run():
    results = {r.number: r for r in run_suite(VerifyConfig())}
    LINES.extend(format_result(results[n]) for n in sorted(results))
    return results


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(first_run, number):
    r = first_run[number]
    assert r.passed, format_result(r)


def test_criterion_10_determinism(first_run):
    second = run_suite(VerifyConfig())
    r = determinism_result([first_run[n] for n in sorted(first_run)], second)
    LINES.append(format_result(r))
    assert r.passed, format_result(r)
