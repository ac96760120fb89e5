import os

from hypothesis import HealthCheck, settings

# deterministic by default; SUSYQM_SEED only drives the optional grid jitter
settings.register_profile(
    "susyqm",
    derandomize=True,
    deadline=None,
    max_examples=int(os.environ.get("SUSYQM_HYPOTHESIS_EXAMPLES", "40")),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("susyqm")

# acceptance criteria register one line each; printed after the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
