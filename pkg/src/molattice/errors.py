"""Exception types shared across the package."""


class PhysicsError(ValueError):
    """A configuration or argument violates a physical constraint."""


class NumericalError(RuntimeError):
    """A computation failed numerically (non-finite state, step-size
    collapse, lost positive-definiteness, pathological acceptance rate)."""
