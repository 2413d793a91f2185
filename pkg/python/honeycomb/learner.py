"""
Learning a GRTS from the lazily generated honeycomb.

Every tile type gets its own graph rooted at a cell of that type. Cells deep
enough inside the explored balls are classified face by face (parent, child,
or a side path with its relative distances), grouped into states by Moore
refinement on their descendants, and read off into a candidate :class:`Rts`.
Candidates are checked cheaply first and then by the transducer verifier;
any failure enlarges the explored balls and the loop starts over.
"""

import logging
import time
from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

from honeycomb.config import DEFAULT_TOLERANCES, LearnerConfig, Tolerances
from honeycomb.errors import (
    BudgetExceeded,
    DanglingClass,
    DistanceViolation,
    InsufficientSamples,
    IterationCapExceeded,
    LearnerError,
    NoParent,
    PathNotFound,
    RtsError,
    StateCapExceeded,
)
from honeycomb.graph import Cell, HoneycombGraph
from honeycomb.rts import PARENT, ChildRule, Rts, Rule, SideRule, State, Word, word_neighbor
from honeycomb.schema import HoneycombSchema

if TYPE_CHECKING:
    from honeycomb.verifier import VerificationReport

logger = logging.getLogger(__name__)

CHILD = ChildRule(-1)
"""Face tag of a child before its state is known."""

Sample = Tuple[int, int]
"""A sample cell: ``(root type, cell id)``."""


@dataclass(frozen=True)
class Counterexample:
    """A cell whose behavior contradicts a candidate."""

    root: int
    cell: int
    depth: int
    reason: str
    word: Optional[Word] = None

    def __str__(self) -> str:
        where = f"word {self.word}" if self.word is not None else f"cell {self.cell}"
        return f"{where} of root {self.root}: {self.reason}"


@dataclass
class Partition:
    """States found by refinement, each with its representative sample."""

    labels: Dict[Sample, int]
    states: List[int]
    representatives: Dict[int, Sample]
    rounds: int


@dataclass
class LearnResult:
    rts: Rts
    iterations: int
    ball_radius: int
    samples: int
    replays: int
    elapsed: float
    report: Optional["VerificationReport"] = None

    @property
    def states(self) -> int:
        return len(self.rts.states)


class Learner:
    """Classifies cells of the explored balls and builds candidate GRTSs."""

    def __init__(
        self,
        schema: HoneycombSchema,
        config: LearnerConfig = LearnerConfig(),
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> None:
        self.schema = schema
        self.config = config
        self.graphs = [
            HoneycombGraph(schema, t, tolerances, depth_cap=config.depth_cap) for t in range(schema.type_count)
        ]
        self.radius = 0
        self.replays = 0
        self._parent_faces: Dict[Sample, int] = {}
        self._tags: Dict[Sample, Tuple[Rule, ...]] = {}
        self._words: Dict[Sample, Word] = {}
        self._cells: Dict[Word, int] = {}
        self._recorded: Dict[Hashable, Tuple[int, ...]] = {}

    # --- exploration ---------------------------------------------------------

    def expand(self, radius: int) -> None:
        """Generate every root graph to ``radius``; distances below it become exact."""
        for graph in self.graphs:
            graph.ensure_ball(graph.root, radius)
        self.radius = max(self.radius, radius)
        logger.debug("explored balls of radius %d: %s cells", radius, [len(g) for g in self.graphs])

    @property
    def classify_depth(self) -> int:
        return self.radius - 2

    def _neighbor(self, root: int, cell: Cell, face: int) -> Cell:
        linked = cell.neighbors[face]
        if linked is None:
            raise PathNotFound(f"cell {cell.id} of root {root} has no neighbor across face {face} yet")
        return self.graphs[root].cells[linked]

    def parent_face(self, root: int, cell: Cell) -> int:
        """The first face leading one step closer to the root.

        Raises:
            NoParent: For the root cell.
        """
        key = (root, cell.id)
        cached = self._parent_faces.get(key)
        if cached is not None:
            return cached
        if cell.dist == 0:
            raise NoParent(f"cell {cell.id} is the root of graph {root}")
        for face in range(len(cell.neighbors)):
            if self._neighbor(root, cell, face).dist == cell.dist - 1:
                self._parent_faces[key] = face
                return face
        raise PathNotFound(f"cell {cell.id} of root {root} has no neighbor at distance {cell.dist - 1}")

    def parent(self, root: int, cell: Cell) -> Cell:
        return self._neighbor(root, cell, self.parent_face(root, cell))

    def _entry_face(self, root: int, cell: Cell) -> int:
        """The face of the parent through which ``cell`` is a child."""
        return self.schema.neighbor(cell.type, self.parent_face(root, cell))[1]

    def is_child(self, root: int, cell: Cell, face: int) -> bool:
        other = self._neighbor(root, cell, face)
        return other.dist == cell.dist + 1 and self.parent(root, other).id == cell.id

    def word_of(self, root: int, cell: Cell) -> Word:
        """The tree word of ``cell``: the entry faces from the root down."""
        key = (root, cell.id)
        word = self._words.get(key)
        if word is None:
            if cell.dist == 0:
                word = Word(root)
            else:
                word = self.word_of(root, self.parent(root, cell)).child(self._entry_face(root, cell))
            self._words[key] = word
            self._cells[word] = cell.id
        return word

    def cell_of(self, word: Word) -> Cell:
        """Follow ``word`` face by face from its root, generating cells as needed."""
        graph = self.graphs[word.root]
        cell_id = self._cells.get(word)
        if cell_id is not None:
            return graph.cells[cell_id]
        cell = graph.root if not word.faces else graph.resolve(self.cell_of(word.parent()), word.faces[-1])
        self._cells[word] = cell.id
        return cell

    # --- classification ------------------------------------------------------

    def _chain(self, root: int, cell: Cell, levels: int) -> Tuple[Tuple[int, int], ...]:
        chain = []
        for _ in range(levels):
            if cell.dist == 0:
                break
            chain.append((cell.type, self.parent_face(root, cell)))
            cell = self.parent(root, cell)
        return tuple(chain)

    def _replay(self, root: int, cell: Cell, face: int) -> None:
        for levels in range(1, cell.dist + 1):
            path = self._recorded.get((face, self._chain(root, cell, levels)))
            if path is not None:
                self.graphs[root].walk(cell, path)
                self.replays += 1
                logger.debug("replayed side path %s for cell %d face %d", path, cell.id, face)
                return

    def extended_side_path(self, root: int, cell: Cell, face: int) -> SideRule:
        """The side path from ``cell`` across ``face`` with its relative distances.

        The path climbs to the parent, moves breadth-first through cells closer
        to the root than ``cell`` to the ancestor of the neighbor at the
        parent's depth, and descends by child moves.

        Raises:
            PathNotFound: If no such path lies inside the explored ball.
        """
        n = cell.dist
        target = self._neighbor(root, cell, face)
        if self.config.subtree_reuse:
            self._replay(root, cell, face)
        descent: List[int] = []
        anchor = target
        while anchor.dist > n - 1:
            descent.append(self._entry_face(root, anchor))
            anchor = self.parent(root, anchor)
        descent.reverse()
        start = self.parent(root, cell)
        middle: List[Tuple[int, int]] = []
        if start.id != anchor.id:
            previous: Dict[int, Tuple[int, int]] = {start.id: (-1, -1)}
            queue = deque([start])
            found = False
            while queue and not found:
                x = queue.popleft()
                for g in range(len(x.neighbors)):
                    y = self._neighbor(root, x, g)
                    if y.dist >= n or y.id in previous:
                        continue
                    previous[y.id] = (x.id, g)
                    if y.id == anchor.id:
                        found = True
                        break
                    queue.append(y)
            if not found:
                raise PathNotFound(f"no side path from cell {cell.id} across face {face} inside depth {n}")
            at = anchor.id
            cells = self.graphs[root].cells
            while at != start.id:
                back, g = previous[at]
                middle.append((g, cells[at].dist - n))
                at = back
            middle.reverse()
        path = [self.parent_face(root, cell)] + [g for g, _ in middle] + descent
        dist = [-1] + [d for _, d in middle] + [anchor.dist + 1 + i - n for i in range(len(descent))]
        if self.config.subtree_reuse:
            levels = -min(dist)
            self._recorded.setdefault((face, self._chain(root, cell, levels)), tuple(path))
        return SideRule(tuple(path), tuple(dist))

    def classify(self, root: int, cell: Cell) -> Tuple[Rule, ...]:
        """Face tags of ``cell``; child tags are the placeholder :data:`CHILD`."""
        key = (root, cell.id)
        cached = self._tags.get(key)
        if cached is not None:
            return cached
        parent_face = self.parent_face(root, cell) if cell.dist else None
        tags: List[Rule] = []
        for face in range(len(cell.neighbors)):
            if face == parent_face:
                tags.append(PARENT)
            elif self.is_child(root, cell, face):
                tags.append(CHILD)
            else:
                tags.append(self.extended_side_path(root, cell, face))
        result = tuple(tags)
        self._tags[key] = result
        return result

    def samples(self, depth: Optional[int] = None) -> List[Sample]:
        """Cells at depth at most ``depth``, ordered by depth, root type and word."""
        depth = self.classify_depth if depth is None else depth
        found = [(g, c.id) for g, graph in enumerate(self.graphs) for c in graph if c.dist <= depth]
        return sorted(found, key=self.order_key)

    def order_key(self, sample: Sample) -> Tuple[int, int, Tuple[int, ...]]:
        root, cell_id = sample
        cell = self.graphs[root].cells[cell_id]
        return cell.dist, root, self.word_of(root, cell).faces

    def children(self, sample: Sample) -> Iterator[Tuple[int, Sample]]:
        root, cell_id = sample
        cell = self.graphs[root].cells[cell_id]
        for face, tag in enumerate(self.classify(root, cell)):
            if tag == CHILD:
                yield face, (root, self._neighbor(root, cell, face).id)

    # --- states ----------------------------------------------------------------

    def refine_states(self) -> Partition:
        """Split cells by face tags, then by the classes of their children until stable.

        Round ``k`` only relabels cells at depth ``classify_depth - k``, whose
        children were labeled in round ``k - 1``.

        Raises:
            InsufficientSamples: If the explored depth runs out before the partition is stable.
        """
        top = self.classify_depth
        if top < 0:
            raise InsufficientSamples(f"radius {self.radius} leaves no cells to classify")
        samples = self.samples(top)
        labels = _relabel(
            {s: (self.graphs[s[0]].cells[s[1]].type, self.classify(*self._cell(s))) for s in samples}, samples
        )
        rounds = 0
        while True:
            rounds += 1
            depth = top - rounds
            domain = [s for s in samples if self._depth(s) <= depth]
            if not domain:
                raise InsufficientSamples(f"partition not stable after {rounds - 1} rounds at radius {self.radius}")
            refined = _relabel(
                {s: (labels[s], tuple((f, labels[c]) for f, c in self.children(s))) for s in domain}, domain
            )
            before = len({labels[s] for s in domain})
            after = len(set(refined.values()))
            logger.debug("refinement round %d: %d classes -> %d on depth %d", rounds, before, after, depth)
            if before == after:
                break
            labels = refined
        states: List[int] = []
        representatives: Dict[int, Sample] = {}
        for s in domain:
            label = labels[s]
            if label not in representatives:
                representatives[label] = s
                states.append(label)
        return Partition(labels, states, representatives, rounds)

    def _cell(self, sample: Sample) -> Tuple[int, Cell]:
        return sample[0], self.graphs[sample[0]].cells[sample[1]]

    def _depth(self, sample: Sample) -> int:
        return self.graphs[sample[0]].cells[sample[1]].dist

    def candidate_rts(self, partition: Partition) -> Rts:
        """Read the rules of every state off its representative.

        Raises:
            DanglingClass: If a representative's child falls in a class without a representative.
        """
        index = {label: i for i, label in enumerate(partition.states)}
        states = []
        for label in partition.states:
            sample = partition.representatives[label]
            root, cell = self._cell(sample)
            rules: List[Rule] = list(self.classify(root, cell))
            for face, child in self.children(sample):
                child_label = partition.labels.get(child)
                if child_label not in index:
                    raise DanglingClass(f"child across face {face} of {self.word_of(root, cell)} has no state")
                rules[face] = ChildRule(index[child_label])
            states.append(State(cell.type, tuple(rules)))
        roots = tuple(index[partition.labels[(g, graph.root.id)]] for g, graph in enumerate(self.graphs))
        return Rts(self.schema.symbol, self.schema.canonical_hash, tuple(states), roots)

    # --- preverification -------------------------------------------------------

    def closest_representatives(self, rts: Rts) -> Dict[int, Word]:
        """Shortest tree word of every reachable state; ties by root type, then word."""
        found: Dict[int, Word] = {}
        frontier = [(Word(t), q) for t, q in enumerate(rts.roots)]
        while frontier:
            nxt = []
            for word, q in sorted(frontier):
                if q in found:
                    continue
                found[q] = word
                for face, child in rts.states[q].children():
                    nxt.append((word.child(face), child))
            frontier = nxt
        return found

    def _counterexample(self, word: Word, reason: str) -> Counterexample:
        cell = self.cell_of(word)
        return Counterexample(word.root, cell.id, cell.dist, reason, word)

    def _tags_match(self, rts: Rts, state: int, tags: Sequence[Rule]) -> bool:
        rules = rts.states[state].rules
        if len(rules) != len(tags):
            return False
        for rule, tag in zip(rules, tags):
            if isinstance(rule, ChildRule):
                if tag != CHILD:
                    return False
            elif rule != tag:
                return False
        return True

    def preverify(self, rts: Rts, l: Optional[int] = None) -> Optional[Counterexample]:
        """Cheap checks of a candidate against the explored graphs.

        Closest representatives are reclassified, every state must be
        reachable, and all words up to ``l`` child moves below a closest
        representative are navigated both by the candidate and in the graph,
        including walks around every edge.
        """
        l = self.config.suffix_check_l if l is None else l
        closest = self.closest_representatives(rts)
        for q, word in sorted(closest.items(), key=lambda item: (len(item[1]), item[1])):
            cell = self.cell_of(word)
            if cell.dist < len(word) or (cell.dist <= self.radius and cell.dist != len(word)):
                return self._counterexample(word, f"tree word of state {q} is not geodesic")
            if cell.dist > self.classify_depth:
                continue
            if rts.type_of(q) != cell.type or not self._tags_match(rts, q, self.classify(word.root, cell)):
                return self._counterexample(word, f"closest representative of state {q} classifies differently")
        for q in range(len(rts.states)):
            if q not in closest:
                return self._unreachable(rts, q)
        if l <= 0:
            return None
        for q, base in sorted(closest.items(), key=lambda item: (len(item[1]), item[1])):
            for word in _extensions(rts, base, q, l):
                problem = self._check_word(rts, word)
                if problem is not None:
                    return problem
        return None

    def _unreachable(self, rts: Rts, state: int) -> Counterexample:
        for sample in self.samples():
            root, cell = self._cell(sample)
            if self._tags_match(rts, state, self.classify(root, cell)) and rts.type_of(state) == cell.type:
                return Counterexample(root, cell.id, cell.dist, f"state {state} is unreachable", self.word_of(root, cell))
        return Counterexample(0, self.graphs[0].root.id, 0, f"state {state} is unreachable")

    def _check_word(self, rts: Rts, word: Word) -> Optional[Counterexample]:
        budget = self.config.side_budget
        cell = self.cell_of(word)
        graph = self.graphs[word.root]
        for face in range(self.schema.face_counts[cell.type]):
            try:
                other = word_neighbor(rts, word, face, budget)
            except (DistanceViolation, BudgetExceeded, RtsError) as exc:
                return self._counterexample(word, f"face {face}: {exc}")
            expected = graph.resolve(cell, face)
            if self.cell_of(other).id != expected.id:
                return self._counterexample(word, f"face {face} leads to {other}, not to the neighbor in the honeycomb")
            if expected.dist <= self.radius - 1 and len(other) != expected.dist:
                return self._counterexample(other, "tree word is not geodesic")
        for cycle in self.schema.edge_cycles[cell.type]:
            current = word
            try:
                for face in cycle.faces:
                    current = word_neighbor(rts, current, face, budget)
            except (DistanceViolation, BudgetExceeded, RtsError) as exc:
                return self._counterexample(word, f"edge {cycle.edge}: {exc}")
            if current != word:
                return self._counterexample(word, f"walking around edge {cycle.edge} ends at {current}")
        return None


def _relabel(keys: Dict[Sample, Hashable], order: Sequence[Sample]) -> Dict[Sample, int]:
    labels: Dict[Hashable, int] = {}
    result = {}
    for sample in order:
        if sample in keys:
            result[sample] = labels.setdefault(keys[sample], len(labels))
    return result


def _extensions(rts: Rts, base: Word, state: int, depth: int) -> Iterator[Word]:
    frontier = [(base, state)]
    for level in range(depth + 1):
        nxt = []
        for word, q in frontier:
            yield word
            if level < depth:
                nxt.extend((word.child(face), child) for face, child in rts.states[q].children())
        frontier = nxt


# --- the learning loop -----------------------------------------------------------


def _at_root(learner: Learner, reason: str) -> Counterexample:
    # No specific cell to blame: grow the balls by one.
    root = learner.graphs[0].root
    return Counterexample(0, root.id, learner.radius - 1, reason)


def learn(
    schema: HoneycombSchema,
    config: LearnerConfig = LearnerConfig(),
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    verify: bool = True,
    threads: int = 1,
) -> LearnResult:
    """Learn a verified GRTS for ``schema``.

    Raises:
        IterationCapExceeded: If no candidate passes within the iteration or radius caps.
    """
    from honeycomb.verifier import verify_rts

    started = time.perf_counter()
    learner = Learner(schema, config, tolerances)
    radius = config.ball_radius
    for iteration in range(1, config.max_iterations + 1):
        if radius > config.max_ball_radius:
            break
        learner.expand(radius)
        try:
            partition = learner.refine_states()
            rts = learner.candidate_rts(partition)
        except (PathNotFound, InsufficientSamples, DanglingClass) as exc:
            logger.info("iteration %d: radius %d too small (%s)", iteration, radius, exc)
            radius += 1
            continue
        samples = len(learner.samples())
        counterexample = learner.preverify(rts)
        source = "preverification"
        report = None
        if counterexample is None:
            try:
                rts.validate_structure(schema)
            except RtsError as exc:
                raise LearnerError(f"candidate is structurally invalid: {exc}") from exc
            if verify:
                source = "verification"
                try:
                    report = verify_rts(rts, schema, config, learner=learner, threads=threads)
                    counterexample = report.counterexample
                    if counterexample is None and not report.ok:
                        counterexample = _at_root(learner, report.witnesses[0])
                except StateCapExceeded as exc:
                    counterexample = _at_root(learner, str(exc))
        logger.info(
            "iteration %d: samples %d, states %d, counterexample from %s",
            iteration,
            samples,
            len(rts.states),
            source if counterexample is not None else "none",
        )
        if counterexample is None:
            elapsed = time.perf_counter() - started
            logger.info("learned %r in %d iterations (%.1fs, %d replays)", rts, iteration, elapsed, learner.replays)
            return LearnResult(rts, iteration, radius, samples, learner.replays, elapsed, report)
        logger.debug("counterexample: %s", counterexample)
        radius = max(radius + 1, min(counterexample.depth + 2, config.max_ball_radius + 1))
    raise IterationCapExceeded(
        f"no verified GRTS within {config.max_iterations} iterations and radius {config.max_ball_radius}"
    )
