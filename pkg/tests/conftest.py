import pytest

from brownkit import _pycore

try:
    from brownkit import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = [_pycore] + ([_core] if _core is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.BACKEND)
def backend(request):
    return request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
