"""Exception types shared across the package."""


class DegenerateParameter(ValueError):
    """Kernel parameter sits on the singular surface 6b - 1 = 0."""


class NonFiniteState(ArithmeticError):
    """A flow produced NaN or Inf entries in the phase-space state."""


class UnstableStep(RuntimeError):
    """Harmonic-oscillator analysis requested at an unstable step size."""


class InsufficientSteps(ValueError):
    """A processed leg needs at least two kernel steps."""


class NoDescent(RuntimeError):
    """Tuner was seeded at a point with non-finite objective."""
