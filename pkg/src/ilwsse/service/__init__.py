"""HTTP service wrapping the numerical core (FastAPI)."""

from .app import create_app

__all__ = ["create_app"]
