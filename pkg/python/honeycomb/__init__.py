"""
honeycomb - geodesic regular tree structures for hyperbolic and Euclidean honeycombs.

The pipeline searches manifolds over finite fields, turns them into honeycomb
schemas, learns a GRTS from the lazily generated honeycomb and verifies it
with transducers. Coordination sequences fall out of the verified GRTS.
"""

__version__ = "0.1.0"

from honeycomb.config import DEFAULT_TOLERANCES, LearnerConfig, SearchConfig, Tolerances
from honeycomb.errors import (
    AlgebraError,
    BudgetExceeded,
    CapExceeded,
    ConfigError,
    CycleOpen,
    DanglingClass,
    DegenerateForm,
    DistanceViolation,
    DivisionByZero,
    FieldMismatch,
    FunctionalityViolation,
    GeometryError,
    GraphError,
    HoneycombError,
    InsufficientSamples,
    IterationCapExceeded,
    LearnerError,
    LocalStructureViolation,
    NeighborMismatch,
    NoParent,
    NoRoots,
    ParentRuleViolation,
    ParseError,
    PathNotFound,
    PrecisionAmbiguity,
    QuotientError,
    RtsError,
    SchemaError,
    SearchFailed,
    Singular,
    StateCapExceeded,
    VerificationError,
)
from honeycomb.geometry import SchlafliSymbol, generator_triple
from honeycomb.graph import HoneycombGraph, coordination_by_bfs
from honeycomb.learner import LearnResult, learn
from honeycomb.quotient import ManifoldReport, find_good_triples, find_manifolds
from honeycomb.rts import Rts, Word, coordination_from_rts, export_geometry, read_rts, write_rts
from honeycomb.schema import BUILTIN_SCHEMAS, HoneycombSchema, read_schema, validate, write_schema
from honeycomb.verifier import VerificationReport, verify_rts

__all__ = [
    "__version__",
    # Configuration
    "DEFAULT_TOLERANCES",
    "LearnerConfig",
    "SearchConfig",
    "Tolerances",
    # Pipeline
    "SchlafliSymbol",
    "generator_triple",
    "HoneycombSchema",
    "BUILTIN_SCHEMAS",
    "validate",
    "read_schema",
    "write_schema",
    "ManifoldReport",
    "find_manifolds",
    "find_good_triples",
    "HoneycombGraph",
    "coordination_by_bfs",
    "Rts",
    "Word",
    "coordination_from_rts",
    "export_geometry",
    "read_rts",
    "write_rts",
    "LearnResult",
    "learn",
    "VerificationReport",
    "verify_rts",
    # Error types
    "HoneycombError",
    "ConfigError",
    "AlgebraError",
    "DivisionByZero",
    "FieldMismatch",
    "Singular",
    "CapExceeded",
    "GeometryError",
    "DegenerateForm",
    "SearchFailed",
    "SchemaError",
    "CycleOpen",
    "QuotientError",
    "NoRoots",
    "LocalStructureViolation",
    "GraphError",
    "PrecisionAmbiguity",
    "RtsError",
    "BudgetExceeded",
    "ParentRuleViolation",
    "DistanceViolation",
    "ParseError",
    "LearnerError",
    "NoParent",
    "PathNotFound",
    "InsufficientSamples",
    "DanglingClass",
    "IterationCapExceeded",
    "VerificationError",
    "FunctionalityViolation",
    "StateCapExceeded",
    "NeighborMismatch",
]
