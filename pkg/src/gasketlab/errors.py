"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` so the command line
front end can translate failures into exit codes and JSON error reports.
"""

from __future__ import annotations


class GasketLabError(Exception):
    """Base class for all package errors."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- plane graph construction ---

class NotSimple(GasketLabError):
    code = "NotSimple"


class NotSpherical(GasketLabError):
    code = "NotSpherical"


class Disconnected(GasketLabError):
    code = "Disconnected"


class Unreachable(GasketLabError):
    code = "Unreachable"


# --- branched covers and towers ---

class CoreValidationError(GasketLabError):
    code = "CoreValidationError"


class NoFixedEdge(GasketLabError):
    code = "NoFixedEdge"


class MultipleFixedEdges(GasketLabError):
    code = "MultipleFixedEdges"


class EdgeNotAbsorbed(GasketLabError):
    code = "EdgeNotAbsorbed"


class PatternMismatch(GasketLabError):
    code = "PatternMismatch"


class NoLift(GasketLabError):
    code = "NoLift"


# --- quadratic cores ---

class NotUnique(GasketLabError):
    code = "NotUnique"


class DistanceMismatch(GasketLabError):
    code = "DistanceMismatch"


class Inconsistent(GasketLabError):
    code = "Inconsistent"


class LimitExceeded(GasketLabError):
    code = "LimitExceeded"


# --- anchored cycle analysis ---

class OrbitEscape(GasketLabError):
    code = "OrbitEscape"


class PatternViolation(GasketLabError):
    code = "PatternViolation"


class NotEnoughCycles(GasketLabError):
    code = "NotEnoughCycles"


# --- circle packings ---

class NoRealSolution(GasketLabError):
    code = "NoRealSolution"


class DegenerateConfiguration(GasketLabError):
    code = "DegenerateConfiguration"


class InvalidRoot(GasketLabError):
    code = "InvalidRoot"


class EmbeddingFailure(GasketLabError):
    code = "EmbeddingFailure"


# --- input handling ---

class SchemaError(GasketLabError):
    code = "SchemaError"
