"""Exception hierarchy shared by every stage of the pipeline."""


class PeerError(Exception):
    """Base class for all errors raised by peercqa."""


class ParseError(PeerError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class ValidationError(PeerError):
    """Well-formed input that violates a structural rule (unknown relation, arity, ...)."""


class SchemaMismatch(ValidationError):
    pass


class TrustViolation(ValidationError):
    def __init__(self, pairs):
        self.pairs = sorted(pairs)
        shown = ", ".join(f"({a},{b})" for a, b in self.pairs)
        super().__init__(
            f"trust level must be functionally determined by (subject, object); conflicting pairs: {shown}"
        )


class UnsafeQuery(ValidationError):
    pass


class UnsupportedError(PeerError):
    """Constraint or transformation outside the supported fragment."""


class NotHCFError(UnsupportedError):
    def __init__(self, cycle):
        self.cycle = cycle
        super().__init__("program is not head-cycle free; head cycle through " + " -> ".join(cycle))


class SearchCapExceeded(PeerError):
    pass
