"""Shared exception types."""

from __future__ import annotations


class NumericalError(RuntimeError):
    """Raised when an iterative or linear-algebra step fails to meet its tolerance."""


class ConfigError(ValueError):
    """Raised for malformed experiment configuration."""
