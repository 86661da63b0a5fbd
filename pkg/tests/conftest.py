import random

import pytest

from rcbdc.group import profile_params, toy_params


class ScriptedRng(random.Random):
    """random.Random whose first randrange calls return queued values."""

    def __new__(cls, queued, seed=0):
        return super().__new__(cls, seed)

    def __init__(self, queued, seed=0):
        super().__init__(seed)
        self.queued = list(queued)

    def randrange(self, *args, **kwargs):
        if self.queued:
            return self.queued.pop(0)
        return super().randrange(*args, **kwargs)


@pytest.fixture
def toy():
    return toy_params()


@pytest.fixture(scope="session")
def test_group():
    return profile_params("test")


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is not None and module.LINES:
        terminalreporter.section("acceptance")
        for line in module.LINES:
            terminalreporter.write_line(line)
