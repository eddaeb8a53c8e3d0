"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(Exception):
    """A scenario configuration is malformed or inconsistent."""


class InvariantViolation(Exception):
    """A runtime consistency check failed during a simulation."""


class InstanceTooLarge(Exception):
    """An exact-solver instance exceeds the exhaustive-search guard."""
