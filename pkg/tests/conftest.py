import sys

import pytest

from slicelab import IntegrationConfig


@pytest.fixture
def cfg():
    """A moderate budget that keeps unit tests fast."""
    return IntegrationConfig(sphere_samples=16384, section_samples=4096, seed=3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        RESULTS = mod.RESULTS
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
