"""Base exception for everything this package raises on purpose."""


class DisasTellerError(Exception):
    """Common ancestor so callers can catch engine errors in one clause."""
