import numpy as np
import pytest

from safepg.core import Trajectory


@pytest.fixture
def make_traj():
    def build(safe_flags, rewards=None):
        n = len(safe_flags) - 1
        rewards = np.zeros(n) if rewards is None else rewards
        return Trajectory(np.zeros((n + 1, 2)), np.zeros((n, 2)), rewards, safe_flags)

    return build


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
