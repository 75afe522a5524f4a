"""Exception hierarchy shared by all refprice modules."""


class RefPriceError(Exception):
    """Base class for every error raised by refprice."""


class DomainError(RefPriceError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class SingularityError(DomainError):
    """The closed-form equilibrium denominator is not positive."""


class RegimeError(DomainError):
    """A formula was queried outside the parameter regime it holds in."""


class HorizonGuardExceeded(DomainError):
    """A scan for a threshold period ran past the configured guard."""


class ConfigurationError(RefPriceError, ValueError):
    """A regularizer, schedule or experiment config is unusable.

    ``field`` names the offending entry when the error comes from a config
    file, so messages read like ``market.theta: theta_1 + theta_2 = 1``.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
