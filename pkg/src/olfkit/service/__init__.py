"""HTTP service wrapping the solver library."""

from .app import app

__all__ = ["app"]
