import pytest

# criterion number -> (ok, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def record(number: int, ok: bool, detail: str = "") -> None:
    prev = ACCEPTANCE.get(number)
    if prev is not None:
        ok = ok and prev[0]
        detail = "; ".join(d for d in (prev[1], detail) if d)
    ACCEPTANCE[number] = (ok, detail)
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


@pytest.fixture
def exact_charlier():
    from mopchr import FamilySpec
    return FamilySpec("charlier", a=[1, 2]).system()
