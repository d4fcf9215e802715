"""Exception hierarchy.

Every error carries a stable ``code`` string; the CLI maps the codes to exit
statuses.
"""


class NonpropError(Exception):
    code = "E_GENERIC"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def __str__(self):
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class NotOrbitError(NonpropError):
    code = "E_NOT_ORBIT"


class IsotropyError(NonpropError):
    code = "E_ISOTROPY"


class NotInvariantError(NonpropError):
    code = "E_NOT_INVARIANT"


class BadGroupError(NonpropError):
    code = "E_BAD_GROUP"


class ParentMismatchError(NonpropError, ValueError):
    code = "E_PARENT_MISMATCH"


class UnknownUnitError(NonpropError, KeyError):
    code = "E_UNKNOWN_UNIT"

    def __str__(self):
        return NonpropError.__str__(self)


class NotPrincipalError(NonpropError):
    code = "E_NOT_PRINCIPAL"


class NotNormalError(NonpropError):
    code = "E_NOT_NORMAL"


class NotSelfAdjointError(NonpropError):
    code = "E_NOT_SELFADJOINT"


class NotAbelianError(NonpropError):
    code = "E_NOT_ABELIAN"


class RadiusError(NonpropError, ValueError):
    code = "E_RADIUS"


class BadModelError(NonpropError, ValueError):
    code = "E_BAD_MODEL"


class HypothesisError(NonpropError):
    code = "E_HYPOTHESIS_FAILS"


class SeparationError(NonpropError):
    code = "E_NO_SEPARATION"


class ConfigError(NonpropError):
    code = "E_CONFIG"


class ModelFileError(NonpropError):
    """A model or groupoid file failed to parse; ``line`` is 1-based."""

    code = "E_MODEL"

    def __init__(self, message="", line=None, path=None):
        super().__init__(message, line=line, path=path)
        self.line = line
        self.path = path

    def __str__(self):
        where = ""
        if self.path is not None:
            where += f"{self.path}:"
        if self.line is not None:
            where += f"{self.line}: "
        elif where:
            where += " "
        return f"{self.code}: {where}{Exception.__str__(self)}"
