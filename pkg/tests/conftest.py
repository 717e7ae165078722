import pytest

# criterion id -> (passed, detail); filled by test_acceptance
RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k[1:])):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record():
    def _record(key, ok, detail):
        RESULTS[key] = (bool(ok), detail)
        print(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")
        return bool(ok)
    return _record
