"""Exception hierarchy shared by the whole package."""


class PathGeomError(Exception):
    """Base class for every error raised by this package."""


class ExprSyntaxError(PathGeomError):
    def __init__(self, message, line, column, source=None):
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{message} at line {line}, column {column}")


class UndeclaredVariableError(PathGeomError):
    def __init__(self, name, declared=()):
        self.name = name
        self.declared = tuple(declared)
        super().__init__(f"undeclared variable {name!r}")


class SingularEvaluationError(PathGeomError, ArithmeticError):
    def __init__(self, subterm, point=None):
        self.subterm = subterm
        self.point = point
        super().__init__(f"singular evaluation at subterm {subterm}")


class InconclusiveError(PathGeomError):
    """Too many sample points hit singularities to reach a verdict."""


class DomainError(PathGeomError, ValueError):
    pass


class NotIntegrableError(PathGeomError):
    pass


class NotPolynomialError(PathGeomError):
    pass
