# src/skyrme_lab/cli/__init__.py

from .main import app as app

__all__ = ["app"]
