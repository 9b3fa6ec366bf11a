import numpy as np
import pytest

from relaysched import ChannelParams, SystemConfig, Topology, draw_channel

CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA):
            terminalreporter.write_line(line)


def random_realization(rng, n, m, k):
    cfg = SystemConfig(num_subchannels=n)
    topo = Topology(m, k)
    return draw_channel(ChannelParams(seed=int(rng.integers(2**63))), cfg, topo, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
