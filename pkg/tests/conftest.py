import itertools

import numpy as np
import pytest

from entsearch.formula import from_clauses, parse_expr

SAMPLE_FORMULA = "(x1 & x2) | x3"
SAMPLE_SOLUTIONS = {"001", "011", "101", "110", "111"}


def brute_force_cnf(n, clauses):
    """Independent truth-table oracle: plain Python over itertools.product."""
    sols = set()
    for bits in itertools.product((0, 1), repeat=n):
        if all(any((bits[abs(l) - 1] == 1) == (l > 0) for l in c) for c in clauses):
            sols.add("".join(map(str, bits)))
    return sols


def random_clauses(n, num, rng, width=3):
    width = min(width, n)
    out = []
    for _ in range(num):
        vs = rng.choice(np.arange(1, n + 1), size=width, replace=False)
        out.append([int(v) * int(s) for v, s in zip(vs, rng.choice((-1, 1), size=width))])
    return out


def random_cnf_cases(count, n_max=8, seed=1234):
    """(n, clauses, Formula) triples with a spread of solution densities."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        n = int(rng.integers(1, n_max + 1))
        num = int(rng.integers(1, 3 * n + 2))
        clauses = random_clauses(n, num, rng)
        cases.append((n, clauses, from_clauses(n, clauses)))
    return cases


@pytest.fixture
def sample():
    return parse_expr(SAMPLE_FORMULA)


@pytest.fixture
def unsat2_cnf(tmp_path):
    path = tmp_path / "unsat2.cnf"
    path.write_text("c every assignment of two variables violates a clause\n"
                    "p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n")
    return path


# --------------------------------------------------------------------------- #
# acceptance summary: one PASS/FAIL line per criterion
# --------------------------------------------------------------------------- #

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = getattr(report, "criterion", None)
    if label is not None:
        _criteria[label] = (report.outcome, report.criterion_text, report.duration)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report.criterion, report.criterion_text = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: (int("".join(c for c in s if c.isdigit())), s)):
        outcome, text, duration = _criteria[label]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {label:<3} {text}  ({duration:.2f}s)")
