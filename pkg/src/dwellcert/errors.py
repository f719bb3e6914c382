"""Exception types raised across the package."""


class DwellCertError(Exception):
    """Base class for every error raised by dwellcert."""


class SignConditionViolated(DwellCertError, ValueError):
    pass


class NotHurwitz(DwellCertError, ValueError):
    pass


class WeightMismatch(DwellCertError, ValueError):
    pass


class InvalidLevels(DwellCertError, ValueError):
    pass


class UnknownModeId(DwellCertError, KeyError):
    pass


class NonFiniteState(DwellCertError, ArithmeticError):
    pass


class SandwichViolated(DwellCertError, ValueError):
    """Comparison bounds alpha(|x - x_u|) <= V(x) <= beta(|x - x_u|) fail at a sampled state."""


class DecayViolated(DwellCertError, ValueError):
    """grad V . f <= -eps V fails at a sampled state."""


class ConfigError(DwellCertError, ValueError):
    pass
