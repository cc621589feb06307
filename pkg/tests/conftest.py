import os
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
FIXTURES = HERE / "fixtures"
REPO = HERE.parent

# criterion number -> list of (label, passed, detail)
ACCEPTANCE_LOG: dict = {}


def record(criterion: int, label: str, passed: bool, detail: str = ""):
    ACCEPTANCE_LOG.setdefault(criterion, []).append((label, bool(passed), detail))
    status = "PASS" if passed else "FAIL"
    print(f"[criterion {criterion:2d}] {status}  {label}  {detail}")


def ais_path():
    """User-placed AIS file: $MCNORMAL_AIS, else data/ais.csv in the repo."""
    env = os.environ.get("MCNORMAL_AIS")
    for cand in (env, REPO / "data" / "ais.csv"):
        if cand and Path(cand).is_file():
            return str(cand)
    return None


@pytest.fixture
def synthetic_path():
    return str(FIXTURES / "synthetic20.csv")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE_LOG):
        entries = ACCEPTANCE_LOG[crit]
        ok = all(p for _, p, _ in entries)
        failed = [lbl for lbl, p, _ in entries if not p]
        line = f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'} ({len(entries) - len(failed)}/{len(entries)} checks)"
        if failed:
            line += "  failing: " + "; ".join(failed)
        tr.write_line(line)
