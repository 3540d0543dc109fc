import pytest

from dfsqkd import _backend

_ACCEPTANCE = []


def record_acceptance(line):
    _ACCEPTANCE.append(line)
    print(line)


@pytest.fixture(params=_backend.available())
def backend(request):
    previous = _backend.use(request.param)
    yield request.param
    _backend.use(previous)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
