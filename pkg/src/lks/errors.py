"""Exception hierarchy shared by every module of the package."""


class LinkError(Exception):
    """Base class for all errors raised by :mod:`lks`."""


# core-measure
class SizeMismatch(LinkError, ValueError):
    pass


class DimensionCap(LinkError, ValueError):
    pass


class NameClash(LinkError, ValueError):
    pass


class UnknownVariable(LinkError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NullNormalizer(LinkError, ZeroDivisionError):
    pass


class OverlappingVariables(LinkError, ValueError):
    pass


# link-algebra
class RangeMismatch(LinkError, ValueError):
    pass


class NotSeparable(LinkError, ValueError):
    pass


class ZeroMarginal(LinkError, ValueError):
    pass


class SingularD(LinkError, ValueError):
    pass


class ImproperSystem(LinkError, ValueError):
    pass


# chain-engine
class InvalidGenerator(LinkError, ValueError):
    pass


class InvalidInitial(LinkError, ValueError):
    pass


class DimMismatch(LinkError, ValueError):
    pass


class SingularT(LinkError, ValueError):
    pass


class BadH(LinkError, ValueError):
    pass


class NotUnitary(LinkError, ValueError):
    pass


# measurement
class StageOutOfRange(LinkError, ValueError):
    pass


class NotAPartition(LinkError, ValueError):
    pass


class DegenerateInput(LinkError, ValueError):
    pass


# complex-relativity
class NotComplexShaped(LinkError, ValueError):
    pass


class SingularBoost(LinkError, ZeroDivisionError):
    pass


# dsl
class ParseError(LinkError, ValueError):
    """A syntax error at a known position.

    ``expected`` is the set of token descriptions that would have been
    accepted at that point.
    """

    def __init__(self, message, line, col, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        super().__init__(self._render())

    def _render(self):
        text = f"{self.line}:{self.col}: {self.message}"
        if self.expected:
            text += " (expected " + ", ".join(self.expected) + ")"
        return text


class SemanticError(LinkError, ValueError):
    """A well-formed document that does not describe a valid system."""

    def __init__(self, message, line=0, col=0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)
