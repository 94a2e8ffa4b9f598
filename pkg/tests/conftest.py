import pytest

_ACCEPTANCE = {}


class AcceptanceReport:
    def record(self, criterion, passed, detail=""):
        _ACCEPTANCE[criterion] = (bool(passed), detail)


@pytest.fixture
def acceptance():
    return AcceptanceReport()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE, key=lambda c: int(c.split()[0][1:])):
        passed, detail = _ACCEPTANCE[criterion]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
