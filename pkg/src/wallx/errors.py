"""Error type shared by every operation that validates its input."""

from __future__ import annotations


class InputError(ValueError):
    """Raised when a problem document or operation argument breaks a precondition.

    ``path`` locates the offending entry inside the source JSON document,
    e.g. ``"walls[2].slope"``.  It is ``None`` for errors raised on values
    constructed directly in Python.
    """

    def __init__(self, message: str, path: str | None = None):
        self.message = message
        self.path = path
        super().__init__(message if path is None else f"{message} (at {path})")
