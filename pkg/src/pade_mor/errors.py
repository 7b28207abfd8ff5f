"""Exception types raised across the package."""


class SolverError(RuntimeError):
    """A shifted linear solve failed or missed its residual target."""

    def __init__(self, message, residual=float("nan"), shift=None):
        super().__init__(message)
        self.residual = residual
        self.shift = shift


class DegeneratePolynomialError(ValueError):
    """Polynomial has effective degree zero, so it has no roots."""


class PoleProximityError(ArithmeticError):
    """Rational evaluation requested (numerically) at a denominator root."""

    def __init__(self, message, q_abs):
        super().__init__(message)
        self.q_abs = q_abs


class PoleAtCenterError(ValueError):
    """Expansion center coincides with a pole of the response map."""


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
