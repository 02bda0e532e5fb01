import pytest

# criterion number -> (title, passed); filled in by test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    def record(number: int, title: str, ok: bool):
        prev = ACCEPTANCE.get(number)
        ok = bool(ok) and (prev is None or prev[1])
        ACCEPTANCE[number] = (title, ok)
        print(f"[{number:2d}] {'PASS' if ok else 'FAIL'}  {title}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{number:2d}] {'PASS' if ok else 'FAIL'}  {title}")
