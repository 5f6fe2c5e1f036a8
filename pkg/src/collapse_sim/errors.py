"""Exception types shared across the package."""


class CollapseSimError(Exception):
    """Base class for all errors raised by collapse_sim."""


class ParameterError(CollapseSimError, ValueError):
    """A physical or numerical parameter lies outside its valid domain."""


class UnsupportedRegimeError(CollapseSimError):
    """The requested closed form only exists in another damping regime."""


class DegenerateWidthError(CollapseSimError, ValueError):
    """A Gaussian density would collapse to zero width."""


class SingularEigenbasisError(CollapseSimError):
    """The position eigenbasis is singular because a2(t) vanishes."""


class OracleFailure(CollapseSimError, RuntimeError):
    """A numerical oracle could not reach its requested accuracy."""
