"""Exception types shared across the package."""

from __future__ import annotations


class TipscanError(Exception):
    """Base class for all tipscan errors."""


class NumericalOverflow(TipscanError):
    """A map or flow evaluation produced a non-finite value.

    ``index`` records the orbit index (or time) at which the overflow
    occurred, when known.
    """

    def __init__(self, message: str, index: float | int | None = None):
        super().__init__(message)
        self.index = index


class UnsupportedDimension(TipscanError):
    """Operation requested for a dimension outside its supported range."""


class NewtonDivergence(TipscanError):
    """Newton iteration failed to converge.

    ``s`` records the shift time at which continuation failed, when known.
    """

    def __init__(self, message: str, s: float | None = None):
        super().__init__(message)
        self.s = s


class BranchJump(TipscanError):
    """Continuation hopped to a different fixed-point branch."""


class SeedNotWashingOut(TipscanError):
    """Pullback seed dependence did not contract within the doubling budget."""


class InvalidBracket(TipscanError):
    """Bisection bracket does not straddle a tracking transition."""


class SameLabel(TipscanError):
    """Both bisection endpoints carry the same basin label."""


class InvalidWindow(TipscanError):
    """Reparametrization window is too narrow for the requested rate."""


class UnknownScenario(TipscanError):
    """Requested built-in scenario id does not exist."""


class ConfigError(TipscanError):
    """Scenario configuration file is malformed."""
