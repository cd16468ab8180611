"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class ShapeMismatch(ValueError):
    """Adjacent weight matrices do not compose."""


class UnsupportedRegularization(ValueError):
    """The operation is not defined for one of the network's regularization sites."""


class AlphabetTooLarge(ValueError):
    """A finite channel is too large for brute-force enumeration."""


class DegenerateTarget(ValueError):
    """The fitted mean vector is (numerically) zero, so no rotation stack exists."""


class ConfigError(ValueError):
    """An experiment configuration failed validation.

    ``field`` names the offending config key.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
