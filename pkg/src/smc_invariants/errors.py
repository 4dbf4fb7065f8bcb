"""Exception types raised across the package."""


class SmcError(Exception):
    """Base class for all package errors."""


class OutOfDomainError(SmcError, ValueError):
    """A probed position falls outside the 10x10 visual domain."""


class EmptyEnsembleError(SmcError, ValueError):
    """An ensemble of zero visual inputs was requested."""


class InvalidConfigError(SmcError, ValueError):
    """A configuration value violates its contract."""


class InsufficientSamplesError(SmcError, ValueError):
    """An analysis needs more exploration samples than provided."""


class DegenerateDirectionError(SmcError, ArithmeticError):
    """A motor combination maps to a (near-)zero motor vector."""


class UniformInputError(SmcError, ValueError):
    """Signal: the batch carries no sensory variation, so no dimension
    estimate exists (uniformity is reported through Err(0) instead)."""


class EmptyMapError(SmcError, ValueError):
    """No characterization carries an invariant angle to place on a map."""
