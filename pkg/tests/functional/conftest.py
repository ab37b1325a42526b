import sys

import pytest

from flickerbound.cli import run
from flickerbound.events import configure_logging


@pytest.fixture
def run_cli(capsys):
    """Run one CLI invocation and return (exit code, stdout, stderr)."""

    def invoke(argv):
        code = run([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    yield invoke
    # the CLI bound events to the captured stream, which pytest closes after the test
    configure_logging("warn", sys.__stderr__)
