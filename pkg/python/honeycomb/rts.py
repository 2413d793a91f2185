"""
Geodesic regular tree structures.

An :class:`Rts` assigns every state a tile type and, for each face of that
type, one rule: the face leads to the parent, to a child in a given state, or
sideways along a stored face path. Side rules carry the relative distance
reached after each step of the path, which is what makes word-level
navigation checkable.

Words name cells of the spanning tree: a root type followed by the faces of
the Child rules taken from that root.
"""

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from honeycomb.errors import (
    BudgetExceeded,
    DistanceViolation,
    ParentRuleViolation,
    ParseError,
    RtsError,
)
from honeycomb.geometry import CELL_CENTER, EUCLIDEAN, SchlafliSymbol
from honeycomb.schema import HoneycombSchema

logger = logging.getLogger(__name__)

DEFAULT_SIDE_BUDGET = 10_000
MODELS = ("poincare_ball", "hyperboloid")


@dataclass(frozen=True)
class ParentRule:
    def to_json(self) -> Any:
        return "parent"

    def __str__(self) -> str:
        return "P"


@dataclass(frozen=True)
class ChildRule:
    state: int

    def to_json(self) -> Any:
        return {"child": self.state}

    def __str__(self) -> str:
        return f"C{self.state}"


@dataclass(frozen=True)
class SideRule:
    """A side connection: follow ``path``; after step ``i`` the word length is off by ``dist[i]``."""

    path: Tuple[int, ...]
    dist: Tuple[int, ...]

    def to_json(self) -> Any:
        return {"side": list(self.path), "dist": list(self.dist)}

    def __str__(self) -> str:
        return "S" + "".join(f"{f}{d:+d}" for f, d in zip(self.path, self.dist))


Rule = Union[ParentRule, ChildRule, SideRule]
PARENT = ParentRule()


@dataclass(frozen=True)
class State:
    type: int
    rules: Tuple[Rule, ...]

    @property
    def parent_face(self) -> Optional[int]:
        return next((f for f, rule in enumerate(self.rules) if isinstance(rule, ParentRule)), None)

    def children(self) -> Iterator[Tuple[int, int]]:
        """``(face, state)`` for every Child rule, in face order."""
        for f, rule in enumerate(self.rules):
            if isinstance(rule, ChildRule):
                yield f, rule.state


@dataclass(frozen=True, order=True)
class Word:
    """A tree path: the root type, then the faces of the Child rules taken."""

    root: int
    faces: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.faces)

    def child(self, face: int) -> "Word":
        return Word(self.root, self.faces + (face,))

    def parent(self) -> "Word":
        if not self.faces:
            raise RtsError("the root word has no parent")
        return Word(self.root, self.faces[:-1])

    def __str__(self) -> str:
        return f"{self.root}:" + ".".join(str(f) for f in self.faces)


@dataclass(frozen=True)
class Rts:
    """An extended GRTS: states, rules and one root state per tile type."""

    symbol: SchlafliSymbol
    schema_hash: str
    states: Tuple[State, ...]
    roots: Tuple[int, ...]

    def rule(self, state: int, face: int) -> Rule:
        return self.states[state].rules[face]

    def type_of(self, state: int) -> int:
        return self.states[state].type

    def state_of(self, word: Word) -> int:
        """The state reached by ``word``.

        Raises:
            RtsError: If ``word`` leaves the tree.
        """
        q = self.roots[word.root]
        for depth, face in enumerate(word.faces):
            rule = self.rule(q, face)
            if not isinstance(rule, ChildRule):
                raise RtsError(f"word {word} takes face {face} at depth {depth}, which is not a child face")
            q = rule.state
        return q

    def reachable(self) -> List[int]:
        """States reachable from the roots by Child rules, in breadth-first order."""
        seen = dict.fromkeys(self.roots)
        queue = deque(seen)
        while queue:
            for _, child in self.states[queue.popleft()].children():
                if child not in seen:
                    seen[child] = None
                    queue.append(child)
        return list(seen)

    def validate_structure(self, schema: HoneycombSchema) -> None:
        """Check the shape of every rule against ``schema``.

        Raises:
            ParentRuleViolation: If a child does not point back with a Parent rule.
            RtsError: On any other structural defect.
        """
        if len(self.roots) != schema.type_count:
            raise RtsError(f"{len(self.roots)} roots for {schema.type_count} tile types")
        for t, q in enumerate(self.roots):
            if not 0 <= q < len(self.states):
                raise RtsError(f"root of type {t} is the unknown state {q}")
            if self.type_of(q) != t:
                raise RtsError(f"root state {q} of type {t} has type {self.type_of(q)}")
            if self.states[q].parent_face is not None:
                raise RtsError(f"root state {q} has a parent face")
        for q, state in enumerate(self.states):
            if not 0 <= state.type < schema.type_count:
                raise RtsError(f"state {q} has type {state.type}, the schema has {schema.type_count} types")
            if len(state.rules) != schema.face_counts[state.type]:
                raise RtsError(f"state {q} has {len(state.rules)} rules for {schema.face_counts[state.type]} faces")
            for f, rule in enumerate(state.rules):
                if isinstance(rule, ChildRule) and not 0 <= rule.state < len(self.states):
                    raise RtsError(f"child of state {q} across face {f} is the unknown state {rule.state}")
        for q, state in enumerate(self.states):
            if sum(isinstance(r, ParentRule) for r in state.rules) > 1:
                raise RtsError(f"state {q} has more than one parent face")
            for f, rule in enumerate(state.rules):
                t2, f2 = schema.neighbor(state.type, f)
                if isinstance(rule, ChildRule):
                    if self.type_of(rule.state) != t2:
                        raise RtsError(f"child of state {q} across face {f} has type {self.type_of(rule.state)}, expected {t2}")
                    if not isinstance(self.rule(rule.state, f2), ParentRule):
                        raise ParentRuleViolation(f"state {rule.state} does not point back to state {q} through face {f2}")
                elif isinstance(rule, SideRule):
                    if not rule.path or len(rule.path) != len(rule.dist):
                        raise RtsError(f"side rule {rule} of state {q} has mismatched path and distances")
                    if rule.path[0] != state.parent_face or rule.dist[0] != -1:
                        raise RtsError(f"side rule {rule} of state {q} does not start with the parent move")
                    _check_side_distances(rule, q)
        unreachable = set(range(len(self.states))) - set(self.reachable())
        if unreachable:
            raise RtsError(f"states {sorted(unreachable)} are unreachable from the roots")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "symbol": list(self.symbol.as_tuple()),
            "schema_hash": self.schema_hash,
            "states": [{"type": s.type, "rules": [r.to_json() for r in s.rules]} for s in self.states],
            "roots": list(self.roots),
        }

    def __repr__(self) -> str:
        return f"Rts({self.symbol}, {len(self.states)} states)"


def _check_side_distances(rule: SideRule, state: int) -> None:
    """Relative distances move by at most one per step, end within one of zero,
    and every non-negative entry is a child step one deeper than the last."""
    for i in range(1, len(rule.dist)):
        step = rule.dist[i] - rule.dist[i - 1]
        if abs(step) > 1:
            raise RtsError(f"side rule {rule} of state {state} jumps by {step} at step {i + 1}")
        if rule.dist[i] >= 0 and step != 1:
            raise RtsError(f"side rule {rule} of state {state} does not end in child moves")
    if rule.dist[-1] not in (-1, 0, 1):
        raise RtsError(f"side rule {rule} of state {state} ends at relative distance {rule.dist[-1]}")


# --- navigation on words --------------------------------------------------------


def word_neighbor(rts: Rts, word: Word, face: int, budget: int = DEFAULT_SIDE_BUDGET) -> Word:
    """The tree word of the neighbor of ``word`` across ``face``.

    Side rules are followed recursively and the relative length is checked
    after every step. Steps that reach the depth of ``word`` or below it must
    be child moves.

    Raises:
        DistanceViolation: If a side path reaches a word of the wrong length.
        BudgetExceeded: If more than ``budget`` rule applications are needed.
    """
    remaining = [budget]
    return _neighbor(rts, word, face, remaining)


def _neighbor(rts: Rts, word: Word, face: int, remaining: List[int]) -> Word:
    remaining[0] -= 1
    if remaining[0] < 0:
        raise BudgetExceeded(f"side connection from {word} across face {face} exceeded its budget")
    rule = rts.rule(rts.state_of(word), face)
    if isinstance(rule, ParentRule):
        return word.parent()
    if isinstance(rule, ChildRule):
        return word.child(face)
    current = word
    for step, (g, d) in enumerate(zip(rule.path, rule.dist), start=1):
        previous = current
        current = _neighbor(rts, current, g, remaining)
        offset = len(current) - len(word)
        if offset != d:
            raise DistanceViolation(word.faces, face, step, d, offset)
        if d >= 0 and current != previous.child(g):
            raise DistanceViolation(word.faces, face, step, d, offset)
    return current


# --- lazy generation ---------------------------------------------------------------


@dataclass(eq=False)
class TreeNode:
    id: int
    state: int
    word: Word
    isometry: np.ndarray
    neighbors: List[Optional[int]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.word)


class RtsGenerator:
    """Generates the honeycomb from an RTS alone, node by node.

    Child rules create nodes; side rules are resolved through their paths and
    linked in both directions.
    """

    def __init__(self, rts: Rts, schema: HoneycombSchema, root_type: int = 0, budget: int = DEFAULT_SIDE_BUDGET):
        self.rts = rts
        self.schema = schema
        self.budget = budget
        self.nodes: List[TreeNode] = []
        self._by_word: Dict[Word, int] = {}
        self._remaining = budget
        self._active = 0
        self.root = self._create(rts.roots[root_type], Word(root_type), np.eye(4))

    def _create(self, state: int, word: Word, isometry: np.ndarray) -> TreeNode:
        node = TreeNode(len(self.nodes), state, word, isometry, [None] * len(self.rts.states[state].rules))
        self.nodes.append(node)
        self._by_word[word] = node.id
        return node

    def node(self, word: Word) -> TreeNode:
        """The node of ``word``, generated along the tree if needed."""
        if word.root != self.root.word.root:
            raise RtsError(f"word {word} does not start at root type {self.root.word.root}")
        node = self.root
        for face in word.faces:
            node = self.neighbor(node, face)
        return node

    def _set(self, node: TreeNode, face: int, other: TreeNode) -> None:
        current = node.neighbors[face]
        if current is not None and current != other.id:
            raise RtsError(f"face {face} of {node.word} links to both node {current} and node {other.id}")
        node.neighbors[face] = other.id

    def neighbor(self, node: TreeNode, face: int) -> TreeNode:
        """The neighbor of ``node`` across ``face``.

        Raises:
            BudgetExceeded: If the side-connection procedure does not finish in budget.
            ParentRuleViolation: If a child does not point back to its parent.
        """
        if node.neighbors[face] is not None:
            return self.nodes[node.neighbors[face]]  # type: ignore[index]
        if self._active == 0:
            self._remaining = self.budget
        self._active += 1
        try:
            self._remaining -= 1
            if self._remaining < 0:
                raise BudgetExceeded(f"side connection from {node.word} across face {face} exceeded its budget")
            t = self.rts.type_of(node.state)
            t2, f2 = self.schema.neighbor(t, face)
            rule = self.rts.rule(node.state, face)
            if isinstance(rule, ParentRule):
                parent = self._by_word.get(node.word.parent())
                if parent is None:
                    raise RtsError(f"parent of {node.word} was never generated")
                other = self.nodes[parent]
            elif isinstance(rule, ChildRule):
                if not isinstance(self.rts.rule(rule.state, f2), ParentRule):
                    raise ParentRuleViolation(f"state {rule.state} does not point back through face {f2}")
                word = node.word.child(face)
                existing = self._by_word.get(word)
                other = (
                    self.nodes[existing]
                    if existing is not None
                    else self._create(rule.state, word, node.isometry @ self.schema.gluing(t, face))
                )
            else:
                other = node
                for g in rule.path:
                    other = self.neighbor(other, g)
            self._set(node, face, other)
            self._set(other, f2, node)
            return other
        finally:
            self._active -= 1


# --- counting ------------------------------------------------------------------------


def coordination_from_rts(rts: Rts, root_type: int, k: int) -> List[int]:
    """Tree level sizes ``c_0 .. c_k`` from a root of ``root_type``.

    For a geodesic tree these equal the shell sizes of the honeycomb.
    """
    counts: Dict[int, int] = {rts.roots[root_type]: 1}
    sequence = [1]
    for _ in range(k):
        nxt: Dict[int, int] = {}
        for q, n in counts.items():
            for _, child in rts.states[q].children():
                nxt[child] = nxt.get(child, 0) + n
        counts = nxt
        sequence.append(sum(counts.values()))
    return sequence


# --- file format ---------------------------------------------------------------------


def serialize_rts(rts: Rts) -> str:
    """Canonical JSON text of an RTS."""
    return json.dumps(rts.to_dict(), sort_keys=True, indent=1) + "\n"


def _fail(message: str) -> None:
    raise ParseError(message)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_rule(raw: Any, where: str, state_count: int) -> Rule:
    if raw == "parent":
        return PARENT
    if isinstance(raw, dict) and set(raw) == {"child"}:
        target = raw["child"]
        if not _is_int(target) or not 0 <= target < state_count:
            _fail(f"{where}: child target {target!r} is not a state index")
        return ChildRule(target)
    if isinstance(raw, dict) and set(raw) == {"side", "dist"}:
        path, dist = raw["side"], raw["dist"]
        if not (isinstance(path, list) and isinstance(dist, list) and all(map(_is_int, path + dist))):
            _fail(f"{where}: side rule needs integer lists 'side' and 'dist'")
        if not path or len(path) != len(dist) or min(path) < 0:
            _fail(f"{where}: side path and distances must be non-empty, of equal length, with face indices")
        return SideRule(tuple(path), tuple(dist))
    _fail(f"{where}: unknown rule {raw!r}")
    raise AssertionError("unreachable")


def parse_rts(text: str) -> Rts:
    """Parse a GRTS file.

    Raises:
        ParseError: On malformed JSON, missing fields, or indices out of range.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid GRTS JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        _fail("GRTS must be a JSON object")
    for key in ("symbol", "schema_hash", "states", "roots"):
        if key not in data:
            _fail(f"GRTS is missing the {key!r} field")
    raw_symbol = data["symbol"]
    if not (isinstance(raw_symbol, list) and len(raw_symbol) == 3 and all(map(_is_int, raw_symbol))):
        _fail("symbol must be a list of three integers")
    try:
        symbol = SchlafliSymbol(*raw_symbol)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    if not isinstance(data["schema_hash"], str):
        _fail("schema_hash must be a string")
    raw_states = data["states"]
    if not isinstance(raw_states, list) or not raw_states:
        _fail("states must be a non-empty list")
    states = []
    for q, raw in enumerate(raw_states):
        if not (isinstance(raw, dict) and _is_int(raw.get("type")) and raw["type"] >= 0 and isinstance(raw.get("rules"), list)):
            _fail(f"states[{q}] must be an object with an integer 'type' and a 'rules' list")
        rules = tuple(_parse_rule(r, f"states[{q}].rules[{f}]", len(raw_states)) for f, r in enumerate(raw["rules"]))
        for rule in rules:
            if isinstance(rule, SideRule) and max(rule.path) >= len(rules):
                _fail(f"states[{q}]: side path {list(rule.path)} names a face beyond {len(rules) - 1}")
        states.append(State(raw["type"], rules))
    roots = data["roots"]
    if not (isinstance(roots, list) and roots and all(_is_int(r) and 0 <= r < len(states) for r in roots)):
        _fail("roots must be a non-empty list of state indices")
    return Rts(symbol, data["schema_hash"], tuple(states), tuple(roots))


def read_rts(path: Union[str, Path]) -> Rts:
    return parse_rts(Path(path).read_text(encoding="utf-8"))


def write_rts(rts: Rts, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.write_text(serialize_rts(rts), encoding="utf-8")
    return target


# --- geometry export -----------------------------------------------------------------


def _project(point: np.ndarray, geometry: str, model: str) -> List[float]:
    if geometry == EUCLIDEAN:
        x = point[:3] / point[3]
        if model == "hyperboloid":
            return [float(v) for v in x] + [1.0]
        return [float(v) for v in x / (1.0 + np.linalg.norm(x))]
    if model == "hyperboloid":
        return [float(v) for v in point]
    return [float(v) for v in point[:3] / (1.0 + point[3])]


def export_geometry(
    schema: HoneycombSchema, rts: Rts, radius: int, model: str = "poincare_ball", root_type: int = 0
) -> Dict[str, Any]:
    """Tree nodes up to ``radius`` as points in ``model`` with parent-child edges.

    Poincare-ball points of Euclidean honeycombs use the radial map
    ``x / (1 + |x|)`` so they stay inside the unit ball.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}, expected one of {', '.join(MODELS)}")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    points = []
    edges = []
    frontier = [(0, rts.roots[root_type], np.eye(4))]
    points.append(_project(CELL_CENTER, schema.geometry, model))
    for _ in range(radius):
        nxt = []
        for index, q, isometry in frontier:
            t = rts.type_of(q)
            for face, child in rts.states[q].children():
                child_isometry = isometry @ schema.gluing(t, face)
                edges.append([index, len(points)])
                nxt.append((len(points), child, child_isometry))
                points.append(_project(child_isometry @ CELL_CENTER, schema.geometry, model))
        frontier = nxt
    logger.debug("exported %d points to depth %d", len(points), radius)
    return {"model": model, "points": points, "edges": edges}
