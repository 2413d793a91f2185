"""
Fixed periodic honeycomb schemas: tile types, face pairings and gluing isometries.

A schema lists, for every tile type ``t`` and face ``f``, the face ``(t', f')``
it is glued to and the isometry ``C_{t,f}`` placing the neighbor: the cell of
type ``t'`` in standard position, moved by ``C_{t,f}``, shares face ``f`` with
the cell of type ``t``. All types share the standard cell of the symbol.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from honeycomb.algebra import mat_eq_within, preserves_form
from honeycomb.config import DEFAULT_TOLERANCES
from honeycomb.errors import CycleOpen, ParseError, SchemaError
from honeycomb.geometry import (
    EUCLIDEAN,
    HYPERBOLIC,
    CellCombinatorics,
    EdgeCycle,
    SchlafliSymbol,
    combinatorics_for,
    generator_triple,
    is_rigid_motion,
    points_close,
    walk_edge,
)
from honeycomb.hashing import digest

logger = logging.getLogger(__name__)

FaceRef = Tuple[int, int]

POINT_REFLECTION = np.diag([-1.0, -1.0, -1.0, 1.0])


@dataclass(frozen=True, eq=False)
class HoneycombSchema:
    """A fixed periodic honeycomb.

    ``pairing`` maps every ``(t, f)`` to the face it is glued to and
    ``matrices`` maps it to ``C_{t,f}``.
    """

    symbol: SchlafliSymbol
    geometry: str
    face_counts: Tuple[int, ...]
    pairing: Mapping[FaceRef, FaceRef]
    matrices: Mapping[FaceRef, np.ndarray]

    @classmethod
    def build(
        cls,
        symbol: SchlafliSymbol,
        face_counts: Sequence[int],
        pairs: Iterable[Tuple[int, int, int, int]],
        matrices: Mapping[FaceRef, np.ndarray],
        geometry: Optional[str] = None,
    ) -> "HoneycombSchema":
        """Build a schema from pairs listed once each.

        Raises:
            SchemaError: If a face is paired twice.
        """
        pairing: Dict[FaceRef, FaceRef] = {}
        for t, f, t2, f2 in pairs:
            for a, b in (((t, f), (t2, f2)), ((t2, f2), (t, f))):
                if pairing.get(a, b) != b:
                    raise SchemaError(f"face {a} is paired with both {pairing[a]} and {b}")
                pairing[a] = b
        return cls(
            symbol,
            geometry or symbol.kind or HYPERBOLIC,
            tuple(face_counts),
            pairing,
            {key: np.asarray(value, dtype=float) for key, value in matrices.items()},
        )

    @property
    def type_count(self) -> int:
        return len(self.face_counts)

    def faces(self, t: int) -> range:
        return range(self.face_counts[t])

    def face_refs(self) -> Iterator[FaceRef]:
        for t, count in enumerate(self.face_counts):
            for f in range(count):
                yield t, f

    def neighbor(self, t: int, f: int) -> FaceRef:
        return self.pairing[(t, f)]

    def neighbor_type(self, t: int, f: int) -> int:
        return self.pairing[(t, f)][0]

    def gluing(self, t: int, f: int) -> np.ndarray:
        return self.matrices[(t, f)]

    @cached_property
    def combinatorics(self) -> CellCombinatorics:
        return combinatorics_for(self.symbol)

    @cached_property
    def inverse_gluings(self) -> Dict[FaceRef, np.ndarray]:
        return {ref: np.linalg.inv(M) for ref, M in self.matrices.items()}

    @cached_property
    def edge_cycles(self) -> Tuple[Tuple[EdgeCycle, ...], ...]:
        """``edge_cycles[t]`` is the tuple of edge cycles of type ``t``."""
        return tuple(edge_cycles_for(self, t) for t in range(self.type_count))

    def cycle_words(self, t: int) -> List[Tuple[int, ...]]:
        return [cycle.faces for cycle in self.edge_cycles[t]]

    def with_pairing(self, t: int, f: int, t2: int, f2: int) -> "HoneycombSchema":
        """A copy where only ``(t, f)`` is redirected to ``(t2, f2)``."""
        pairing = dict(self.pairing)
        pairing[(t, f)] = (t2, f2)
        return HoneycombSchema(self.symbol, self.geometry, self.face_counts, pairing, self.matrices)

    def with_matrix(self, t: int, f: int, matrix: np.ndarray) -> "HoneycombSchema":
        matrices = dict(self.matrices)
        matrices[(t, f)] = np.asarray(matrix, dtype=float)
        return HoneycombSchema(self.symbol, self.geometry, self.face_counts, self.pairing, matrices)

    def canonical_text(self) -> str:
        return serialize_schema(self)

    @cached_property
    def canonical_hash(self) -> str:
        return digest(serialize_schema(self))

    def __repr__(self) -> str:
        return f"HoneycombSchema({self.symbol}, types={self.type_count}, geometry={self.geometry})"


@dataclass(frozen=True)
class Violation:
    kind: str
    location: Tuple[int, ...]
    detail: str


@dataclass
class ValidationReport:
    """Every violated schema invariant; an empty report means the schema is valid."""

    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, location: Tuple[int, ...], detail: str) -> None:
        self.violations.append(Violation(kind, location, detail))

    def kinds(self) -> List[str]:
        return sorted({v.kind for v in self.violations})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "violations": [{"kind": v.kind, "location": list(v.location), "detail": v.detail} for v in self.violations],
        }

    def __str__(self) -> str:
        if self.ok:
            return "schema is valid"
        return "\n".join(f"{v.kind} at {list(v.location)}: {v.detail}" for v in self.violations)


def _scaled_eps(M: np.ndarray, eps: float) -> float:
    return eps * max(1.0, float(np.abs(M).max()))


def validate(schema: HoneycombSchema, eps: float = DEFAULT_TOLERANCES.epsilon) -> ValidationReport:
    """Check every schema invariant and report each violation with its location."""
    report = ValidationReport()
    cell = schema.combinatorics
    expected_faces = schema.symbol.face_count
    if schema.geometry != schema.symbol.kind:
        report.add("geometry", (), f"{schema.symbol} is {schema.symbol.kind}, schema says {schema.geometry}")
    for t, count in enumerate(schema.face_counts):
        if count != expected_faces:
            report.add("faces", (t,), f"type {t} has {count} faces, {schema.symbol} cells have {expected_faces}")
    if not report.ok:
        return report

    for t, f in schema.face_refs():
        ref = (t, f)
        target = schema.pairing.get(ref)
        if target is None:
            report.add("unpaired", ref, "face has no pairing")
            continue
        t2, f2 = target
        if not (0 <= t2 < schema.type_count and 0 <= f2 < schema.face_counts[t2]):
            report.add("pairing-range", ref, f"paired with nonexistent face {target}")
            continue
        if schema.pairing.get(target) != ref:
            report.add("involution", ref, f"paired with {target}, which is paired with {schema.pairing.get(target)}")
        M = schema.matrices.get(ref)
        if M is None or M.shape != (4, 4):
            report.add("matrix", ref, "missing or malformed gluing matrix")
            continue
        if schema.geometry == EUCLIDEAN:
            if not is_rigid_motion(M):
                report.add("isometry", ref, "gluing is not an orientation-preserving rigid motion")
        elif not preserves_form(M) or np.linalg.det(M) <= 0:
            report.add("isometry", ref, "gluing is not an orientation-preserving Minkowski isometry")
        M2 = schema.matrices.get(target)
        if M2 is not None and M2.shape == (4, 4):
            if not mat_eq_within(M @ M2, np.eye(4), _scaled_eps(M, eps) * max(1.0, float(np.abs(M2).max()))):
                report.add("inverse", ref, f"C{list(ref)} is not the inverse of C{list(target)}")
        if not points_close(M @ cell.face_centers[f2], cell.face_centers[f]):
            report.add("face-match", ref, f"C{list(ref)} does not carry face {f2} of type {t2} onto face {f}")

    if report.ok:
        for t in range(schema.type_count):
            try:
                edge_cycles_for(schema, t, eps)
            except CycleOpen as exc:
                report.add("cycle", (t, exc.edge), str(exc))
    return report


def edge_cycles_for(
    schema: HoneycombSchema, t: int, eps: float = DEFAULT_TOLERANCES.epsilon
) -> Tuple[EdgeCycle, ...]:
    """Walk around every edge of type ``t`` and return the face words.

    Raises:
        CycleOpen: If a walk does not come back after ``r`` steps with the identity.
    """
    cell = schema.combinatorics
    r = schema.symbol.r
    limit = 2 * schema.type_count * len(cell.edges) + 1
    cycles = []
    for edge, (first, _) in enumerate(cell.edges):
        cycle = walk_edge(
            cell,
            t,
            edge,
            gluing=schema.gluing,
            pairing=schema.neighbor,
            stop=lambda t2, e2, f2, M, edge=edge, first=first: (t2, e2, f2) == (t, edge, first),
            limit=limit,
        )
        if len(cycle) != r:
            raise CycleOpen(t, edge, f"{len(cycle)} cells around the edge, expected {r}")
        if not mat_eq_within(cycle.product, np.eye(4), _scaled_eps(cycle.product, eps) * 10):
            raise CycleOpen(t, edge, "the product of gluings around the edge is not the identity")
        cycles.append(cycle)
    return tuple(cycles)


# --- built-in one-cell manifolds ---------------------------------------------


def builtin_torus_434() -> HoneycombSchema:
    """The cube with opposite faces glued by unit translations."""
    sym = SchlafliSymbol(4, 3, 4)
    cell = combinatorics_for(sym)
    pairs = []
    matrices = {}
    for f, center in enumerate(cell.face_centers):
        opposite = np.array([-center[0], -center[1], -center[2], 1.0])
        f2 = cell.locate_face(opposite)
        if f2 is None:
            raise SchemaError(f"face {f} of the cube has no opposite face")
        T = np.eye(4)
        T[:3, 3] = 2.0 * center[:3]
        matrices[(0, f)] = T
        if f <= f2:
            pairs.append((0, f, 0, f2))
    return HoneycombSchema.build(sym, [cell.face_count], pairs, matrices, EUCLIDEAN)


def builtin_seifert_weber_535() -> HoneycombSchema:
    """The dodecahedron with opposite faces glued after a 3/10 turn.

    The gluing of face ``f`` is the reflection in the plane of ``f`` after the
    point reflection through the cell center after a power of the rotation
    about the axis of ``f``. The power that yields a valid schema is kept.

    Raises:
        SchemaError: If no rotation power closes the edge cycles.
    """
    sym = SchlafliSymbol(5, 3, 5)
    triple = generator_triple(sym)
    cell = combinatorics_for(sym)
    face_mirror = triple.reflections[3]
    rotation = triple.face_rotation()
    for power in range(1, sym.p):
        spin = np.linalg.matrix_power(rotation, power)
        pairs = []
        matrices = {}
        for f, rep in enumerate(cell.face_representatives):
            rep_inv = np.linalg.inv(rep)
            mirror = rep @ face_mirror @ rep_inv
            turn = rep @ spin @ rep_inv
            matrices[(0, f)] = mirror @ POINT_REFLECTION @ turn
            f2 = cell.locate_face(POINT_REFLECTION @ cell.face_centers[f])
            if f2 is None:
                raise SchemaError(f"face {f} of the dodecahedron has no opposite face")
            if f <= f2:
                pairs.append((0, f, 0, f2))
        schema = HoneycombSchema.build(sym, [cell.face_count], pairs, matrices, HYPERBOLIC)
        report = validate(schema)
        if report.ok:
            logger.info("Seifert-Weber gluing uses rotation power %d", power)
            return schema
        logger.debug("rotation power %d rejected: %s", power, report.kinds())
    raise SchemaError("no face rotation yields the Seifert-Weber gluing")


BUILTIN_SCHEMAS = {
    "torus-434": builtin_torus_434,
    "seifert-weber-535": builtin_seifert_weber_535,
}


# --- file format ---------------------------------------------------------------


def _real(x: float) -> str:
    if x == 0:
        return "0"
    return f"{x:.17g}"


def _pairs(schema: HoneycombSchema) -> List[Tuple[int, int, int, int]]:
    pairs = set()
    for (t, f), (t2, f2) in schema.pairing.items():
        a, b = sorted([(t, f), (t2, f2)])
        pairs.add((a[0], a[1], b[0], b[1]))
    return sorted(pairs)


def serialize_schema(schema: HoneycombSchema) -> str:
    """Canonical JSON text: sorted keys and pairings, reals with 17 significant digits."""
    matrices = ",\n    ".join(
        f"[{t}, {f}, [{', '.join(_real(float(v)) for v in schema.matrices[(t, f)].ravel())}]]"
        for t, f in sorted(schema.matrices)
    )
    pairings = ", ".join(f"[{t}, {f}, {t2}, {f2}]" for t, f, t2, f2 in _pairs(schema))
    types = ", ".join(f'{{"faces": {count}}}' for count in schema.face_counts)
    symbol = ", ".join(str(v) for v in schema.symbol.as_tuple())
    return (
        "{\n"
        f'  "geometry": "{schema.geometry}",\n'
        f'  "matrices": [\n    {matrices}\n  ],\n'
        f'  "pairings": [{pairings}],\n'
        f'  "symbol": [{symbol}],\n'
        f'  "types": [{types}]\n'
        "}\n"
    )


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParseError(message)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def parse_schema(text: str) -> HoneycombSchema:
    """Parse a schema file.

    Raises:
        ParseError: On malformed JSON or fields of the wrong shape.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid schema JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    _require(isinstance(data, dict), "schema must be a JSON object")
    for key in ("symbol", "geometry", "types", "pairings", "matrices"):
        _require(key in data, f"schema is missing the {key!r} field")
    raw_symbol = data["symbol"]
    _require(
        isinstance(raw_symbol, list) and len(raw_symbol) == 3 and all(_is_int(v) for v in raw_symbol),
        "symbol must be a list of three integers",
    )
    try:
        symbol = SchlafliSymbol(*raw_symbol)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    geometry = data["geometry"]
    _require(geometry in (HYPERBOLIC, EUCLIDEAN), f"geometry must be {HYPERBOLIC!r} or {EUCLIDEAN!r}")
    types = data["types"]
    _require(isinstance(types, list) and len(types) > 0, "types must be a non-empty list")
    face_counts = []
    for index, entry in enumerate(types):
        _require(
            isinstance(entry, dict) and _is_int(entry.get("faces")) and entry["faces"] > 0,
            f"types[{index}] must be an object with a positive 'faces' count",
        )
        face_counts.append(entry["faces"])

    def in_range(t: Any, f: Any) -> bool:
        return _is_int(t) and _is_int(f) and 0 <= t < len(face_counts) and 0 <= f < face_counts[t]

    pairs = []
    _require(isinstance(data["pairings"], list), "pairings must be a list")
    for index, entry in enumerate(data["pairings"]):
        _require(
            isinstance(entry, list) and len(entry) == 4 and in_range(entry[0], entry[1]) and in_range(entry[2], entry[3]),
            f"pairings[{index}] must be [t, f, t2, f2] naming existing faces",
        )
        pairs.append(tuple(entry))
    matrices = {}
    _require(isinstance(data["matrices"], list), "matrices must be a list")
    for index, entry in enumerate(data["matrices"]):
        _require(
            isinstance(entry, list)
            and len(entry) == 3
            and in_range(entry[0], entry[1])
            and isinstance(entry[2], list)
            and len(entry[2]) == 16
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry[2]),
            f"matrices[{index}] must be [t, f, [16 reals]] naming an existing face",
        )
        matrices[(entry[0], entry[1])] = np.array(entry[2], dtype=float).reshape(4, 4)
    try:
        return HoneycombSchema.build(symbol, face_counts, pairs, matrices, geometry)  # type: ignore[arg-type]
    except SchemaError as exc:
        raise ParseError(str(exc)) from exc


def read_schema(path: Union[str, Path]) -> HoneycombSchema:
    return parse_schema(Path(path).read_text(encoding="utf-8"))


def write_schema(schema: HoneycombSchema, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.write_text(serialize_schema(schema), encoding="utf-8")
    return target
