class InfeasiblePhysicsError(ValueError):
    """The requested physical quantity has no admissible solution."""


class NumericalError(RuntimeError):
    """Integration or sampling failed (non-finite values, step underflow, positivity loss)."""


class GuardViolation(ValueError):
    """Step size too coarse for the rates involved."""


class PerturbativeWarning(UserWarning):
    """A truncated time series is evaluated outside its validity range."""
