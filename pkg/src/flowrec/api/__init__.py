"""HTTP service exposing session-based recommend-as-you-go composition."""

from .app import create_app  # noqa: F401
