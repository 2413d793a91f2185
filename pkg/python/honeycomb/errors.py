"""
Error hierarchy for honeycomb.

Every exception raised by the package derives from :class:`HoneycombError`, so
callers can catch the whole family at once. Conditions that are reported as data
(schema validation reports, verification witnesses) are not exceptions.
"""

from typing import Optional, Sequence, Tuple


class HoneycombError(Exception):
    """Base class for all honeycomb errors."""


class ConfigError(HoneycombError):
    """Raised on unknown or ill-typed configuration values."""


# --- algebra ---------------------------------------------------------------


class AlgebraError(HoneycombError):
    """Base class for scalar and matrix arithmetic errors."""


class DivisionByZero(AlgebraError, ZeroDivisionError):
    """Raised when inverting the zero element of a finite field."""


class FieldMismatch(AlgebraError):
    """Raised when combining values from different fields or scalar kinds."""


class Singular(AlgebraError):
    """Raised when inverting a non-invertible matrix."""


class CapExceeded(HoneycombError):
    """Raised when a bounded enumeration grows beyond its cap."""

    def __init__(self, what: str, cap: int) -> None:
        super().__init__(f"{what} exceeded the cap of {cap}")
        self.what = what
        self.cap = cap


# --- geometry and schema ---------------------------------------------------


class GeometryError(HoneycombError):
    """Base class for errors in the real generator construction."""


class DegenerateForm(GeometryError):
    """Raised when the Coxeter form is not of signature (3,1)."""


class SearchFailed(GeometryError):
    """Raised when no short reflection product realizes a generator."""


class SchemaError(HoneycombError):
    """Base class for structurally broken honeycomb schemas."""


class CycleOpen(SchemaError):
    """Raised when walking around an edge does not close up."""

    def __init__(self, tile_type: int, edge: int, detail: str) -> None:
        super().__init__(f"edge cycle of type {tile_type}, edge {edge} does not close: {detail}")
        self.tile_type = tile_type
        self.edge = edge


# --- quotient --------------------------------------------------------------


class QuotientError(HoneycombError):
    """Base class for errors in the finite-field manifold search."""


class NoRoots(QuotientError):
    """Raised when the field lacks an element the construction requires."""


class LocalStructureViolation(QuotientError):
    """Raised when an emitted schema does not have r cells around every edge."""


# --- graph -----------------------------------------------------------------


class GraphError(HoneycombError):
    """Base class for lazy honeycomb generation errors."""


class PrecisionAmbiguity(GraphError):
    """Raised when two isometries agree within the safety band but not within kappa."""

    def __init__(self, distance: float, kappa: float, beta: float) -> None:
        super().__init__(
            f"isometries differ by {distance:.3e}: above kappa={kappa:g} but inside beta={beta:g}"
        )
        self.distance = distance


# --- rts -------------------------------------------------------------------


class RtsError(HoneycombError):
    """Base class for errors raised while evaluating a tree structure."""


class BudgetExceeded(RtsError):
    """Raised when side-connection recursion exceeds its step budget."""


class ParentRuleViolation(RtsError):
    """Raised when a child rule does not point back with a parent rule."""


class DistanceViolation(RtsError):
    """Raised when a side path visits a word of the wrong length."""

    def __init__(self, word: Tuple[int, ...], face: int, step: int, expected: int, actual: int) -> None:
        super().__init__(
            f"side path of face {face} from {list(word)}: step {step} reached relative "
            f"distance {actual}, expected {expected}"
        )
        self.word = word
        self.face = face
        self.step = step
        self.expected = expected
        self.actual = actual


class ParseError(HoneycombError):
    """Raised on malformed schema, GRTS, or configuration files."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None) -> None:
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.line = line
        self.column = column


# --- learner ---------------------------------------------------------------


class LearnerError(HoneycombError):
    """Base class for learning errors."""


class NoParent(LearnerError):
    """Raised when asking for the parent face of a root cell."""


class PathNotFound(LearnerError):
    """Raised when the explored ball is too small to find a side path."""


class InsufficientSamples(LearnerError):
    """Raised when the sampled region cannot determine a state's children."""


class DanglingClass(LearnerError):
    """Raised when a child class has no representative."""


class IterationCapExceeded(LearnerError):
    """Raised when the learning loop runs out of iterations."""


# --- verifier --------------------------------------------------------------


class VerificationError(HoneycombError):
    """Base class for transducer verification errors."""


class FunctionalityViolation(VerificationError):
    """Raised when a transducer relates one input word to two outputs."""

    def __init__(self, word: Sequence[int], outputs: Sequence[Sequence[int]]) -> None:
        super().__init__(f"word {list(word)} has several images: {[list(o) for o in outputs]}")
        self.word = tuple(word)
        self.outputs = tuple(tuple(o) for o in outputs)


class StateCapExceeded(CapExceeded, VerificationError):
    """Raised when a transducer grows beyond the configured state cap."""

    def __init__(self, cap: int) -> None:
        CapExceeded.__init__(self, "transducer states", cap)


class NeighborMismatch(VerificationError):
    """Raised when a side rule leads to a word whose cell is not the geometric neighbor."""

    def __init__(self, word: Sequence[int], face: int, neighbor: Sequence[int]) -> None:
        super().__init__(f"face {face} of word {list(word)} leads to {list(neighbor)}, which is not its neighbor")
        self.word = tuple(word)
        self.face = face
        self.neighbor = tuple(neighbor)
