"""FastAPI service wrapping the benchmark core package."""

from .app import create_app

__all__ = ["create_app"]
