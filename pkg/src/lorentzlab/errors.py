"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 2, ``NumericalDomainError``
subclasses to exit code 3.
"""


class LorentzLabError(Exception):
    pass


class InputError(LorentzLabError):
    pass


class NumericalDomainError(LorentzLabError):
    pass


def _caret(source: str, pos: int) -> str:
    if source is None or pos < 0:
        return ""
    return f"\n  {source}\n  {' ' * pos}^"


class ExprSyntaxError(InputError):
    def __init__(self, message: str, source: str = "", pos: int = -1):
        self.source = source
        self.pos = pos
        super().__init__(f"{message} at position {pos}{_caret(source, pos)}")


class UndeclaredSymbolError(InputError):
    def __init__(self, symbol: str, source: str = "", pos: int = -1):
        self.symbol = symbol
        self.source = source
        self.pos = pos
        super().__init__(f"undeclared symbol {symbol!r} at position {pos}{_caret(source, pos)}")


class ExprDomainError(NumericalDomainError):
    def __init__(self, what: str, subexpr: str, pos: int = -1, source: str | None = None):
        self.what = what
        self.subexpr = subexpr
        self.pos = pos
        where = f" at position {pos}" if pos >= 0 else ""
        super().__init__(f"{what} in subexpression {subexpr}{where}")


class SchemaError(InputError):
    pass


class DegenerateMetricError(NumericalDomainError):
    pass


class SignatureError(InputError):
    pass


class ChartBoundaryError(NumericalDomainError):
    pass


class DegeneratePlaneError(NumericalDomainError):
    pass


class RankDeficiencyError(NumericalDomainError):
    pass


class DegenerateSubmanifoldError(NumericalDomainError):
    """Second fundamental form requested on a degenerate (lightlike) submanifold."""


class NonNormalError(InputError):
    pass


class ZeroFieldError(NumericalDomainError):
    pass


class InsufficientHypersurfacesError(InputError):
    pass


class ResamplingError(NumericalDomainError):
    pass
