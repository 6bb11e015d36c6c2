"""Exception hierarchy shared by all kaclab modules.

Exit-code mapping used by the CLI: ConfigError -> 2, AccuracyError -> 3,
CapacityError -> 4.
"""


class KaclabError(Exception):
    """Base class for all kaclab errors."""


class ConfigError(KaclabError):
    """Invalid configuration or invalid operation input.

    Carries the full list of messages so that every schema violation is
    reported at once, not just the first one.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class AccuracyError(KaclabError):
    """A certified tolerance could not be met.

    ``values`` holds whatever partial results were available (e.g. both
    quadrature refinements), so callers can inspect the failure.
    """

    def __init__(self, message, values=None):
        self.values = values
        super().__init__(message)


class CapacityError(KaclabError):
    """Requested problem size exceeds the exact-diagonalization cap."""


class UnsupportedPotentialError(ConfigError):
    """The potential family does not support the requested certified bound."""


class InsufficientDataError(ConfigError):
    """Not enough records to compute a trend/report."""
