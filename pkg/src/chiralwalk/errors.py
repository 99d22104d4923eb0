"""Exception hierarchy shared by every module.

Each class carries a stable ``code`` string so reports and the CLI can name
the failure without depending on Python class names.
"""

from __future__ import annotations


class ChiralWalkError(Exception):
    code = "Error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details


# numkernel
class NonSquare(ChiralWalkError):
    code = "NonSquare"


class NonFinite(ChiralWalkError):
    code = "NonFinite"


class NotHermitian(ChiralWalkError):
    code = "NotHermitian"


class ConvergenceFailure(ChiralWalkError):
    code = "ConvergenceFailure"


class NonUnitPhase(ChiralWalkError):
    code = "NonUnitPhase"


# lattice
class PeriodMismatch(ChiralWalkError):
    code = "PeriodMismatch"


class ShapeMismatch(ChiralWalkError):
    code = "ShapeMismatch"


# fredholm
class CurveThroughOrigin(ChiralWalkError):
    code = "CurveThroughOrigin"


class RefinementExhausted(ChiralWalkError):
    code = "RefinementExhausted"


class NotHermitianFamily(ChiralWalkError):
    code = "NotHermitianFamily"


# splitstep
class OutOfDomain(ChiralWalkError):
    code = "OutOfDomain"


class UndefinedProduct(ChiralWalkError):
    code = "UndefinedProduct"


class UndefinedQuotient(ChiralWalkError):
    code = "UndefinedQuotient"


class NotFredholm(ChiralWalkError):
    code = "NotFredholm"


class UnsupportedPeriod(ChiralWalkError):
    code = "UnsupportedPeriod"


# eigenstate
class SupremumViolated(ChiralWalkError):
    code = "SupremumViolated"


class FredholmViolated(ChiralWalkError):
    code = "FredholmViolated"


class ZeroIndex(ChiralWalkError):
    code = "ZeroIndex"


class WindowTooSmall(ChiralWalkError):
    code = "WindowTooSmall"


class SandwichFailure(ChiralWalkError):
    code = "SandwichFailure"


# oracle
class TooLarge(ChiralWalkError):
    code = "TooLarge"


class NotPeriodic(ChiralWalkError):
    code = "NotPeriodic"


class NonPositive(ChiralWalkError):
    code = "NonPositive"


# cli
class SchemaError(ChiralWalkError):
    code = "SchemaError"


class RangeError(ChiralWalkError):
    code = "RangeError"


class IoError(ChiralWalkError):
    code = "IoError"
