import datetime as dt

import numpy as np
import pytest

from maintvar.evaluate import SyntheticSpec

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def _record(number: int, name: str, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] AC{number} {name}: {detail}")
        return passed

    return _record


def var2_spec(seed: int, T: int = 2000, k: int = 5) -> SyntheticSpec:
    """Designed stable VAR(2): own lag-2 coefficient -0.9 keeps estimates tight."""
    b1 = 0.5 * np.eye(k) + 0.1 * np.eye(k, k=-1)
    b2 = -0.9 * np.eye(k)
    alpha = np.array([0.05, -0.03, 0.02, 0.0, 0.04, 0.01, -0.02][:k])
    return SyntheticSpec(alpha, np.stack([b1, b2]), 0.01 * np.eye(k), T, seed)


def var1_spec(seed: int, T: int = 2000) -> SyntheticSpec:
    beta = np.array([[[0.5, 0.2], [-0.1, 0.4]]])
    return SyntheticSpec(np.array([0.3, -0.2]), beta, 0.01 * np.eye(2), T, seed)


@pytest.fixture
def plant_header():
    from maintvar.ingest import DEFAULT_HEADERS, LOGICAL_COLUMNS

    return [DEFAULT_HEADERS[c] for c in LOGICAL_COLUMNS]


def write_plant_csv(path, header, rows):
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def plant_row(date, total=100.0, text="", pr=80.0):
    share = [total / 5] * 5
    return [date, *share, total, 1000.0, 0.0, total, 5.0, pr, text]


START = dt.date(2012, 1, 1)
