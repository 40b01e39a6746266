"""Exception hierarchy shared by all modules."""


class SymbreakError(Exception):
    """Base class for every error raised by this package."""


class InputError(SymbreakError, ValueError):
    """An argument is outside the operation's domain."""


class NotAUnitError(SymbreakError, ArithmeticError):
    """Attempt to invert a ring element whose unit coefficient is not +-1."""


class DegenerateError(SymbreakError):
    """A linearization is singular where the operation needs an isomorphism."""


class CoverageError(SymbreakError):
    """The supplied spectrum does not reach far enough."""


class ConfigurationError(SymbreakError, ValueError):
    """A model or problem configuration is unusable."""


class PreconditionError(SymbreakError):
    """A theorem checker was called outside its hypotheses."""


class ConvergenceError(SymbreakError, RuntimeError):
    """An iterative solver failed to converge."""
