import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion as PASS or FAIL with a short detail."""

    class _Recorder:
        def __init__(self):
            self.number = None
            self.detail = ""

        def __call__(self, number: int, detail: str = ""):
            self.number = number
            self.detail = detail
            return self

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            line = f"criterion {self.number}: {status} {self.detail}".rstrip()
            CRITERIA[self.number] = (status, line)
            print(line)
            return False

    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n][1])
