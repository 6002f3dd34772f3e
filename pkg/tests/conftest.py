import numpy as np
import pytest
from hypothesis import settings

from tbteleport.protocol import NodeConfig, load_scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

PERFECT = {"efficiency": 1.0, "dark_rate_hz": 0.0, "jitter_ps": 0.0, "dead_time_ns": 0.0}


def ideal_config(**extra):
    """Lossless, noiseless, drift-free link with single-pair post-selection."""
    cfg = NodeConfig().replace(
        user={"mu": 0.1}, relay={"mu": 0.1},
        detectors={k: PERFECT for k in ("herald", "relay", "central", "local")},
        drift={"amplitude_c": 0.0, "walk_c_per_sqrt_h": 0.0},
        simulation={"post_select_single_pair": True}, feedback={"enabled": False})
    return cfg.replace(**extra) if extra else cfg


@pytest.fixture
def ideal_cfg():
    return ideal_config()


@pytest.fixture(scope="session")
def link_cfg():
    return load_scenario("paper_12p3km")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
