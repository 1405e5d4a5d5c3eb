"""Exception taxonomy shared across the package.

Domain errors on plainly bad arguments raise ValueError. The classes here
cover the structured failure modes that the command line maps to distinct
exit codes: configuration problems, numerical failures, and validation
checks that ran but did not pass.
"""


class ConfigError(Exception):
    """Bad scenario configuration; message names the offending key path."""


class NumericsError(Exception):
    """Base class for numerical failures during a computation."""


class QuadratureError(NumericsError):
    """Velocity quadrature failed its doubling convergence check."""


class FitError(NumericsError):
    """Least-squares fit could not be performed (singular design)."""


class RangeError(NumericsError):
    """Data do not cover the feature being located (e.g. no sign change)."""


class ServoDivergenceError(NumericsError):
    """Servo residual grew for many consecutive steps; loop unstable."""

    def __init__(self, step: int, residual: float):
        self.step = step
        self.residual = residual
        super().__init__(
            f"servo residual grew for 10 consecutive updates "
            f"(step {step}, |residual| = {abs(residual):.3g} rad)"
        )


class ValidationFailure(Exception):
    """A cross-check ran to completion and failed (e.g. |z| >= 3)."""
