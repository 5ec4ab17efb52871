import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by_criterion = {}
    for part, ok, detail in _ACCEPTANCE:
        by_criterion.setdefault(part[1], []).append((part, ok, detail))
    for crit in sorted(by_criterion):
        parts = by_criterion[crit]
        ok = all(p[1] for p in parts)
        failed = sorted({p[0] for p in parts if not p[1]})
        note = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}{note}")
    tr.section("acceptance details")
    for part, ok, detail in _ACCEPTANCE:
        tr.write_line(f"{part:4s} {'pass' if ok else 'FAIL'}  {detail}")
