"""Exception types shared across the package."""


class ElectionError(ValueError):
    """Invalid election, matching, committee, weight sequence or parameter."""


class GuardExceeded(RuntimeError):
    """A desk-scale guard refused a computation.

    Raised instead of silently degrading to heuristics; the message states
    which guard tripped and why the unrestricted problem is intractable.
    """


class EngineError(RuntimeError):
    """An internal invariant failed; indicates a bug, not bad input."""
