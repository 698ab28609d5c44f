"""Minimum time functions for differential inclusions and their regularity certificates."""

from mintime.core.types import TOOL_VERSION

__version__ = TOOL_VERSION

__all__ = ["__version__"]
