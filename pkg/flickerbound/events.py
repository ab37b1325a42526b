from contextlib import contextmanager
import sys
import time
from typing import Iterator, Optional, TextIO

from dbt.adapters.events.logging import AdapterLogger
from dbt_common.events.base_types import EventLevel
from dbt_common.events.event_manager_client import add_logger_to_manager, cleanup_event_logger
from dbt_common.events.logger import LineFormat, LoggerConfig


logger = AdapterLogger("FlickerBound")


def configure_logging(level: str = "info", stream: Optional[TextIO] = None) -> None:
    """Replace the default stdout logger with a plain-text one on `stream` (standard error by default).

    Standard output carries CSV, so events never go there.
    """
    cleanup_event_logger()
    add_logger_to_manager(
        LoggerConfig(
            name="flickerbound",
            line_format=LineFormat.PlainText,
            level=EventLevel(level),
            use_colors=False,
            output_stream=stream or sys.stderr,
        )
    )


@contextmanager
def timed(label: str) -> Iterator[None]:
    """Log the wall time spent inside the block at debug level."""
    start = time.perf_counter()
    try:
        yield
    finally:
        logger.debug(f"{label} finished in {time.perf_counter() - start:.3f}s")
