import pytest

from mesocollapse.mesons import load_dataset

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def dataset():
    return load_dataset()


@pytest.fixture
def record():
    """Record an acceptance verdict: record(criterion, label, passed, detail)."""

    def _record(criterion, label, passed, detail=""):
        _ACCEPTANCE[(criterion, label)] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by_crit = {}
    for (crit, label), (ok, detail) in sorted(_ACCEPTANCE.items()):
        by_crit.setdefault(crit, []).append((label, ok, detail))
    for crit, items in sorted(by_crit.items()):
        ok = all(i[1] for i in items)
        failed = [f"{label}: {detail}" for label, good, detail in items if not good]
        line = f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += "  (" + "; ".join(failed) + ")"
        tr.write_line(line)
