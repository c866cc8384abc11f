"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


class InputError(ValueError):
    """Numerically invalid input: non-finite data, empty sample sets, out-of-range parameters."""


class StructuralError(ValueError):
    """Structurally incompatible arguments, e.g. a dimension mismatch."""


class ContractError(TypeError):
    """An operation was applied to an object of the wrong kind."""


class CalibrationError(ValueError):
    """Amplitude calibration cannot succeed (the unperturbed core already violates the bound)."""


class NumericError(ArithmeticError):
    """A non-finite value appeared during evaluation.

    Carries the evaluation point so the failure can be reported with a witness.
    """

    def __init__(self, message: str, point=None):
        super().__init__(message if point is None else f"{message} at {point!r}")
        self.point = point
