import numpy as np
import pytest

from csoutsource.keymat import SecretKeys, SystemParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def keys():
    return SecretKeys(bytes(range(16)), bytes(range(16, 32)), bytes(range(32, 48)))


@pytest.fixture
def params():
    return SystemParams(N=256, L=2, m=16, n=128)



def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
