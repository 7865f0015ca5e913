import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; marked FAIL unless the test body completes."""
    entry = {"name": request.node.name, "ok": False, "detail": ""}
    ACCEPTANCE_LINES.append(entry)

    def done(detail=""):
        entry["ok"] = True
        entry["detail"] = detail

    return done


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for e in ACCEPTANCE_LINES:
        mark = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"[{mark}] {e['name']}  {e['detail']}")
