"""Shared exception types."""


class InvalidConfigurationError(ValueError):
    """A model, law, or run configuration violates a documented precondition."""


class BlowUpError(RuntimeError):
    """Integration produced a non-finite state.

    Carries the simulation time at which the failure was detected.  With the
    dissipative laws implemented here true solutions stay bounded for all
    time, so a blow-up almost always means the step size is too large for
    the explicit scheme in use.
    """

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"non-finite state at t = {self.time:.6g}")
