"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain an operation is defined on."""


class UnsupportedModelError(DomainError):
    """The operation is not available for the given camera model."""


class NumericError(ArithmeticError):
    """An iterative solver failed to converge."""


class ConfigError(ValueError):
    """A job configuration failed validation.

    ``errors`` holds every problem found, each prefixed with its line number
    when one is known.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))
