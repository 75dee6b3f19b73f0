"""Exception hierarchy for twistl."""


class TwistlError(Exception):
    """Base class for all library errors."""


class NonUnimodular(TwistlError, ValueError):
    pass


class DomainError(TwistlError, ValueError):
    pass


class ParseError(TwistlError, ValueError):
    pass


class MissingSpectralParameter(ParseError):
    pass


class InsufficientCoefficients(TwistlError):
    pass


class OrderTooHigh(TwistlError, ValueError):
    pass


class InvalidLabel(TwistlError, ValueError):
    pass


class InvalidSplit(TwistlError, ValueError):
    pass


class NonFactorable(InvalidSplit):
    pass


class InvalidIndex(TwistlError, ValueError):
    pass


class NonInvertibleResidue(TwistlError, ValueError):
    pass


class NonPrimitiveCharacter(TwistlError, ValueError):
    pass


class TooFar(TwistlError, ValueError):
    pass


class MissingOrder(TwistlError, KeyError):
    pass


class ProviderFailure(TwistlError):
    pass


class GammaPole(TwistlError, ZeroDivisionError):
    pass


class TooLarge(TwistlError, ValueError):
    pass


class QuadratureError(TwistlError):
    pass


class ToleranceExceeded(TwistlError):
    pass
