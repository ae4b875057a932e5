import numpy as np
import pytest

from wlecov.datasets import load_diabetes, load_stars_cyg

_ACCEPTANCE = {}


def record_acceptance(criterion, passed, detail=""):
    """Store one acceptance outcome; several calls for the same criterion are ANDed."""
    prev = _ACCEPTANCE.get(criterion)
    if prev is None:
        _ACCEPTANCE[criterion] = [passed, [detail] if detail else []]
    else:
        prev[0] = prev[0] and passed
        if detail:
            prev[1].append(detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (len(k), k)):
        passed, details = _ACCEPTANCE[key]
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[passed]
        terminalreporter.write_line(f"criterion {key}: {status}  {'; '.join(details)}")


@pytest.fixture(scope="session")
def stars():
    return load_stars_cyg().data


@pytest.fixture(scope="session")
def diabetes():
    ds = load_diabetes()
    return ds.data, ds.labels


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
