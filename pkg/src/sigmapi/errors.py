"""Exception types shared across the package."""


class SigmaPiError(Exception):
    """Base class for all library errors."""


class ParseError(SigmaPiError):
    """Concrete-syntax error, with a position into the source text."""

    def __init__(self, message, pos=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at offset {pos})"
        super().__init__(message)


class TypeCheckError(SigmaPiError):
    """A term does not match any formation rule.

    Carries the path (child indices from the root) to the offending node
    and the name of the rule that failed.
    """

    def __init__(self, message, path=(), rule=None):
        self.path = tuple(path)
        self.rule = rule
        where = "/".join(str(i) for i in self.path) or "root"
        tag = f" [{rule}]" if rule else ""
        super().__init__(f"{message}{tag} at {where}")


class RenameError(SigmaPiError):
    """Channel substitution would capture an unreplaced name."""


class CompositionError(SigmaPiError):
    """Cut or atomic composition on incompatible ports/protocols."""


class SizeError(SigmaPiError):
    """A semantic computation exceeded the configured finiteness bound."""
