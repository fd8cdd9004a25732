import pytest

# criterion -> list of (label, passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, list] = {}


@pytest.fixture
def record():
    def add(criterion: int, label: str, passed: bool, detail: str = ""):
        ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))
        return passed

    return add


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        items = ACCEPTANCE[crit]
        ok = all(p for _, p, _ in items)
        failed = [f"{label} ({detail})" for label, p, detail in items if not p]
        line = f"criterion {crit}: {'PASS' if ok else 'FAIL'} ({sum(p for _, p, _ in items)}/{len(items)} checks)"
        if failed:
            line += " failing: " + "; ".join(failed)
        elif len(items) <= 4:
            line += " " + "; ".join(f"{label}: {detail}" for label, _, detail in items)
        tr.write_line(line)
