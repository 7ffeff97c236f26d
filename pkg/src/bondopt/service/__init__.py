"""HTTP service exposing the pipeline as JSON endpoints."""

from .app import create_app

__all__ = ["create_app"]
