"""Exception hierarchy shared by all modules."""


class HankelIdError(Exception):
    """Base class for every error raised by hankelid."""


class InvalidInput(HankelIdError, ValueError):
    pass


class InvalidShape(InvalidInput):
    pass


class InvalidDepth(InvalidInput):
    pass


class NotContained(HankelIdError):
    """Inner subspace is not a subspace of the outer one."""


class FormatError(HankelIdError):
    """A trajectory or system file could not be parsed."""


class NotObservable(HankelIdError):
    pass


class InvalidPerturbation(HankelIdError):
    pass


class InternalInvariantViolated(HankelIdError):
    """A property guaranteed by theory failed numerically (usually a tolerance issue)."""


class IdentificationFailed(HankelIdError):
    pass
