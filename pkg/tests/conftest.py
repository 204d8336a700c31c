import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

# reproducible property runs: same examples on every invocation
settings.register_profile("repro", derandomize=True, database=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
