"""Exception hierarchy shared by all heva modules."""


class HevaError(Exception):
    """Base class for all errors raised by this package."""


class TailTooLarge(HevaError):
    """A certified truncation tail exceeds the policy's admissible maximum."""


class NonFiniteCoefficient(HevaError):
    """An accumulated coefficient overflowed or became NaN."""


class UnsupportedInput(HevaError):
    """The operation is only defined for a restricted class of inputs."""


class InvalidWeights(HevaError):
    """A Schur weight oracle returned a non-positive weight."""


class NotMarkov(HevaError):
    """A kernel or structure map fails the stochasticity requirements."""


class InvalidParameter(HevaError):
    """A chain-family parameter lies outside its admissible range."""


class MissingCertificate(HevaError):
    """Certified tail propagation was requested without any norm bound."""


class ElementFormatError(HevaError):
    """A coefficient-vector file could not be parsed."""


class KernelFormatError(HevaError):
    """A transition-kernel file could not be parsed."""
