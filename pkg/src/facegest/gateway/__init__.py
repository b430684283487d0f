"""Service surface: session engine, streaming server, replay driver, CLI."""

from .session import Session, SessionConfig, SessionConfigError
from .replay import run_replay

__all__ = ["Session", "SessionConfig", "SessionConfigError", "run_replay"]
