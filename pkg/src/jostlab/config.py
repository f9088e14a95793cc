"""
Process settings read from the environment.
"""

import os
from dataclasses import dataclass

from jostlab.diagnostics.run_logger import RunLogger

LOG_FORMATS = ("human", "json", "silent")


def _flag(value: str | None) -> bool:
    return (value or "").strip().lower() in ("1", "true", "yes", "on")


@dataclass
class RuntimeSettings:
    """Logging and thread defaults for CLI runs."""

    LOG_FORMAT: str = "human"
    DEBUG: bool = False
    THREADS: int = 1

    @classmethod
    def from_env(cls) -> "RuntimeSettings":
        log_format = os.getenv("JOSTLAB_LOG_FORMAT", "human").strip().lower()
        if log_format not in LOG_FORMATS:
            raise ValueError(
                f"JOSTLAB_LOG_FORMAT must be one of {LOG_FORMATS}, got {log_format!r}"
            )
        threads_raw = os.getenv("JOSTLAB_THREADS", "1")
        try:
            threads = int(threads_raw)
        except ValueError:
            raise ValueError(f"JOSTLAB_THREADS must be an integer, got {threads_raw!r}")
        if threads < 1:
            raise ValueError(f"JOSTLAB_THREADS must be at least 1, got {threads}")
        return cls(
            LOG_FORMAT=log_format,
            DEBUG=_flag(os.getenv("JOSTLAB_DEBUG")),
            THREADS=threads,
        )

    def build_logger(self) -> RunLogger:
        return RunLogger(debug_mode=self.DEBUG, output_format=self.LOG_FORMAT)
