"""Exception types shared across the package."""


class CfmimoError(Exception):
    """Base class for package-specific errors."""


class ConfigError(CfmimoError, ValueError):
    """An experiment configuration is invalid or incomplete."""


class EmptyRealizationError(CfmimoError, ValueError):
    """An operation that divides by sums over APs received a realization with L=0."""


class NearDuplicateRatesError(CfmimoError, ValueError):
    """Hypoexponential rates too close for the partial-fraction form to be stable."""


class ShadowingNotConfiguredError(CfmimoError, ValueError):
    """A shadowing draw was requested from a model without shadowing parameters."""


class InsufficientDrawsError(CfmimoError, RuntimeError):
    """A Monte-Carlo rate estimate has a standard error above the configured limit."""


class TrialError(CfmimoError, RuntimeError):
    """Wraps an error raised inside a Monte-Carlo trial with the trial index."""

    def __init__(self, trial_index, cause):
        super().__init__(f"trial {trial_index} failed: {cause}")
        self.trial_index = trial_index
