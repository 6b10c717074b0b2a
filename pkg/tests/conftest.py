import numpy as np

from isp_nav.field import IspField


def random_field(rng, width, height, p_background=0.4, levels=None):
    """Random field with deliberate tau ties and background cells."""
    if levels is None:
        tau = rng.integers(0, 6, size=(height, width)).astype(float) * 0.5
    else:
        tau = rng.uniform(0.0, levels, size=(height, width))
    dot = rng.integers(-4, 3, size=(height, width)).astype(float) * 0.25
    bg = rng.random((height, width)) < p_background
    tau[bg] = np.inf
    dot[bg] = np.inf
    return IspField(tau, dot)


# Verdict lines recorded by the acceptance suite, echoed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0].split("-")[1])):
            terminalreporter.write_line(line)
