"""
Transducer-based verification of a GRTS.

Words are read with a leading root letter ``root_offset + root type``; pairs
of words are read letter by letter, the shorter one padded with ``BOX``.
For every type ``t`` and face ``f`` a deterministic transducer recognizes the
pairs ``(w, u)`` where ``u`` names the neighbor of ``w`` across ``f``. Its
states are keyed by the states reached on both tapes and the relative
isometry of the two cells, so pairs that behave alike share a state.
Composing these transducers around every edge must give back the identity.
"""

import logging
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from honeycomb.algebra import real_key
from honeycomb.config import DEFAULT_TOLERANCES, LearnerConfig
from honeycomb.errors import (
    BudgetExceeded,
    DistanceViolation,
    FunctionalityViolation,
    NeighborMismatch,
    RtsError,
    StateCapExceeded,
    VerificationError,
)
from honeycomb.learner import Counterexample, Learner
from honeycomb.rts import ChildRule, Rts, Word, word_neighbor
from honeycomb.schema import HoneycombSchema

logger = logging.getLogger(__name__)

BOX = -1
DONE = -2

Letter = Tuple[int, int]


class Transducer:
    """A finite transducer over letter pairs, possibly with epsilon moves."""

    def __init__(self, state_cap: int = 50_000) -> None:
        self.state_cap = state_cap
        self.transitions: Dict[int, Dict[Letter, Set[int]]] = defaultdict(dict)
        self.epsilon: Dict[int, Set[int]] = defaultdict(set)
        self.accepting: Set[int] = set()
        self.keys: List[Hashable] = []
        self.start = self.add_state(("start",))

    def __len__(self) -> int:
        return len(self.keys)

    def add_state(self, key: Hashable) -> int:
        if len(self.keys) >= self.state_cap:
            raise StateCapExceeded(self.state_cap)
        self.keys.append(key)
        return len(self.keys) - 1

    def add(self, state: int, letter: Letter, target: int) -> None:
        self.transitions[state].setdefault(letter, set()).add(target)

    def letters(self) -> List[Letter]:
        return sorted({letter for moves in self.transitions.values() for letter in moves})

    def closure(self, states: Iterable[int]) -> FrozenSet[int]:
        seen = set(states)
        stack = list(seen)
        while stack:
            for nxt in self.epsilon.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return frozenset(seen)

    def step(self, states: Iterable[int], letter: Letter) -> FrozenSet[int]:
        targets: Set[int] = set()
        for s in states:
            targets |= self.transitions.get(s, {}).get(letter, set())
        return self.closure(targets)

    def accepts(self, w: Sequence[int], u: Sequence[int]) -> bool:
        states = self.closure([self.start])
        for letter in pad(w, u):
            states = self.step(states, letter)
            if not states:
                return False
        return bool(states & self.accepting)

    def size(self) -> int:
        return len(self.keys)

    def __repr__(self) -> str:
        return f"Transducer({len(self.keys)} states, {len(self.accepting)} accepting)"


def pad(w: Sequence[int], u: Sequence[int]) -> List[Letter]:
    n = max(len(w), len(u))
    return [(w[i] if i < len(w) else BOX, u[i] if i < len(u) else BOX) for i in range(n)]


def root_offset(schema: HoneycombSchema) -> int:
    """Root letters start after every face letter."""
    return max(schema.face_counts)


def letters_of(word: Word, offset: int) -> Tuple[int, ...]:
    return (offset + word.root,) + word.faces


def word_from_letters(letters: Sequence[int], offset: int) -> Word:
    real = [a for a in letters if a != BOX]
    return Word(real[0] - offset, tuple(real[1:]))


# --- the tree language --------------------------------------------------------


@dataclass
class TreeLanguage:
    """The automaton of tree words from one root: states of the RTS, Child rules as moves."""

    start: int
    transitions: Dict[int, Dict[int, int]]

    def accepts(self, faces: Sequence[int]) -> bool:
        q: Optional[int] = self.start
        for face in faces:
            q = self.transitions.get(q, {}).get(face)  # type: ignore[arg-type]
            if q is None:
                return False
        return True

    def count(self, length: int) -> int:
        counts = {self.start: 1}
        for _ in range(length):
            nxt: Dict[int, int] = defaultdict(int)
            for q, n in counts.items():
                for child in self.transitions.get(q, {}).values():
                    nxt[child] += n
            counts = nxt
        return sum(counts.values())


def tree_language_dfa(rts: Rts, root_type: int) -> TreeLanguage:
    return TreeLanguage(
        rts.roots[root_type], {q: dict(state.children()) for q, state in enumerate(rts.states)}
    )


# --- neighbor transducers --------------------------------------------------------


@dataclass(frozen=True)
class _Track:
    q_w: Optional[int]
    q_u: Optional[int]
    J: np.ndarray = field(compare=False)
    ended_w: bool = False
    ended_u: bool = False

    def key(self, kappa: float) -> Hashable:
        return self.q_w, self.q_u, real_key(self.J, kappa), self.ended_w, self.ended_u


class NeighborTransducerBuilder:
    """Builds the transducer of face ``f`` on type ``t`` by covering the tree language."""

    def __init__(
        self,
        rts: Rts,
        schema: HoneycombSchema,
        t: int,
        f: int,
        state_cap: int = 50_000,
        budget: int = 10_000,
        kappa: float = DEFAULT_TOLERANCES.kappa,
    ) -> None:
        self.rts = rts
        self.schema = schema
        self.t = t
        self.f = f
        self.budget = budget
        self.kappa = kappa
        self.offset = root_offset(schema)
        self.target_type = schema.neighbor(t, f)[0]
        self.gluing = schema.gluing(t, f)
        self.transducer = Transducer(state_cap)
        self._tracks: Dict[int, _Track] = {self.transducer.start: _Track(None, None, np.eye(4))}
        self._by_key: Dict[Hashable, int] = {}
        self.current: Optional[Word] = None

    def _move(self, q: Optional[int], letter: int) -> Tuple[Optional[int], np.ndarray]:
        if letter >= self.offset:
            return self.rts.roots[letter - self.offset], np.eye(4)
        rule = self.rts.rule(q, letter)  # type: ignore[arg-type]
        if not isinstance(rule, ChildRule):
            raise RtsError(f"letter {letter} is not a child move from state {q}")
        return rule.state, self.schema.gluing(self.rts.type_of(q), letter)  # type: ignore[arg-type]

    def _advance(self, track: _Track, a: int, b: int) -> _Track:
        q_w, q_u, J = track.q_w, track.q_u, track.J
        ended_w, ended_u = track.ended_w, track.ended_u
        if a == BOX:
            ended_w = True
        else:
            q_w, C = self._move(q_w, a)
            J = np.linalg.inv(C) @ J
        if b == BOX:
            ended_u = True
        else:
            q_u, C = self._move(q_u, b)
            J = J @ C
        return _Track(q_w, q_u, J, ended_w, ended_u)

    def _accepting(self, track: _Track) -> bool:
        if track.q_w is None or track.q_u is None:
            return False
        if self.rts.type_of(track.q_w) != self.t or self.rts.type_of(track.q_u) != self.target_type:
            return False
        scale = max(1.0, float(np.abs(self.gluing).max()))
        return float(np.abs(track.J - self.gluing).max()) <= self.kappa * scale

    def thread(self, w: Sequence[int], u: Sequence[int]) -> int:
        """Run ``(w, u)`` through the transducer, adding the states it lacks."""
        T = self.transducer
        state = T.start
        for letter in pad(w, u):
            targets = T.transitions.get(state, {}).get(letter)
            if targets:
                state = next(iter(targets))
                continue
            track = self._advance(self._tracks[state], *letter)
            key = track.key(self.kappa)
            target = self._by_key.get(key)
            if target is None:
                target = T.add_state(key)
                self._by_key[key] = target
                self._tracks[target] = track
                if self._accepting(track):
                    T.accepting.add(target)
            T.add(state, letter, target)
            state = target
        return state

    def _box_closure(self, states: FrozenSet[int]) -> Set[int]:
        seen = set(states)
        stack = list(states)
        while stack:
            for (a, _), targets in self.transducer.transitions.get(stack.pop(), {}).items():
                if a != BOX:
                    continue
                for s in targets:
                    if s not in seen:
                        seen.add(s)
                        stack.append(s)
        return seen

    def uncovered_word(self) -> Optional[Tuple[int, ...]]:
        """The shortest, then lexicographically first, word of type ``t`` with no accepted image."""
        T = self.transducer
        start: Tuple[Optional[int], FrozenSet[int]] = (None, frozenset([T.start]))
        queue = deque([(start, ())])
        seen = {start}
        while queue:
            (q, states), letters = queue.popleft()
            if q is not None and self.rts.type_of(q) == self.t:
                if not self._box_closure(states) & T.accepting:
                    return letters
            if q is None:
                moves = [(self.offset + r, root) for r, root in enumerate(self.rts.roots)]
            else:
                moves = list(self.rts.states[q].children())
            for letter, q2 in moves:
                states2 = frozenset(
                    s2
                    for s in states
                    for (a, _), targets in T.transitions.get(s, {}).items()
                    if a == letter
                    for s2 in targets
                )
                node = (q2, states2)
                if node not in seen:
                    seen.add(node)
                    queue.append((node, letters + (letter,)))
        return None

    def build(self) -> Transducer:
        """Cover every word of type ``t``.

        Raises:
            DistanceViolation: If a side path misbehaves on the way.
            NeighborMismatch: If a computed neighbor is not the geometric one.
            FunctionalityViolation: If some word gets two images.
            StateCapExceeded: If the transducer grows beyond its cap.
        """
        while True:
            w = self.uncovered_word()
            if w is None:
                break
            word = word_from_letters(w, self.offset)
            self.current = word
            neighbor = word_neighbor(self.rts, word, self.f, self.budget)
            u = letters_of(neighbor, self.offset)
            end = self.thread(w, u)
            if end not in self.transducer.accepting:
                raise NeighborMismatch(w, self.f, u)
        self.current = None
        witness = functionality_witness(self.transducer)
        if witness is not None:
            w, u1, u2 = witness
            self.current = word_from_letters(w, self.offset)
            raise FunctionalityViolation(w, [u1, u2])
        logger.debug("transducer for type %d face %d: %d states", self.t, self.f, len(self.transducer))
        return self.transducer


def build_transducer(
    rts: Rts,
    schema: HoneycombSchema,
    t: int,
    f: int,
    state_cap: int = 50_000,
    budget: int = 10_000,
) -> Transducer:
    return NeighborTransducerBuilder(rts, schema, t, f, state_cap, budget).build()


def functionality_witness(T: Transducer) -> Optional[Tuple[List[int], List[int], List[int]]]:
    """A word with two different accepted images, or ``None``.

    Two runs read the same first tape; a run may stop in an accepting state,
    after which only padding remains on the first tape.
    """
    start = (T.start, T.start, False)
    previous: Dict[Tuple[int, int, bool], Tuple[Any, Tuple[int, int, int]]] = {start: (None, (BOX, BOX, BOX))}
    queue = deque([start])

    def moves(state: int) -> Iterator[Tuple[Letter, int]]:
        if state == DONE:
            yield (BOX, BOX), DONE
            return
        for letter, targets in sorted(T.transitions.get(state, {}).items()):
            for target in sorted(targets):
                yield letter, target

    while queue:
        node = queue.popleft()
        x1, x2, diverged = node
        if node == (DONE, DONE, True):
            a_tape, u1, u2 = [], [], []
            while previous[node][0] is not None:
                node, (a, b1, b2) = previous[node]
                a_tape.append(a)
                u1.append(b1)
                u2.append(b2)
            strip = lambda xs: [x for x in reversed(xs) if x != BOX]  # noqa: E731
            return strip(a_tape), strip(u1), strip(u2)
        successors = []
        if x1 != DONE and x1 in T.accepting:
            successors.append(((DONE, x2, diverged), (BOX, BOX, BOX), True))
        if x2 != DONE and x2 in T.accepting:
            successors.append(((x1, DONE, diverged), (BOX, BOX, BOX), True))
        if not (x1 == DONE and x2 == DONE):
            for (a1, b1), y1 in moves(x1):
                for (a2, b2), y2 in moves(x2):
                    if a1 != a2 or (x1 == DONE and a2 != BOX) or (x2 == DONE and a1 != BOX):
                        continue
                    if y1 == DONE and y2 == DONE:
                        continue
                    successors.append(((y1, y2, diverged or b1 != b2), (a1, b1, b2), False))
        for nxt, letters, _ in successors:
            if nxt not in previous:
                previous[nxt] = (node, letters)
                queue.append(nxt)
    return None


def identity_transducer(rts: Rts, t: int, offset: int) -> Transducer:
    """Recognizes ``(w, w)`` for every tree word ``w`` of type ``t``."""
    T = Transducer(state_cap=len(rts.states) + 1)
    states = {q: T.add_state(("id", q)) for q in range(len(rts.states))}
    for r, root in enumerate(rts.roots):
        T.add(T.start, (offset + r, offset + r), states[root])
    for q, state in enumerate(rts.states):
        if state.type == t:
            T.accepting.add(states[q])
        for face, child in state.children():
            T.add(states[q], (face, face), states[child])
    return T


def compose(T1: Transducer, T2: Transducer, state_cap: int = 50_000) -> Transducer:
    """The relation of ``T1`` followed by ``T2``.

    Padding on the middle tape is matched letter by letter; a finished side
    keeps reading padding, and pairs of padding become epsilon moves.
    """
    T = Transducer(state_cap)
    index = {(T1.start, T2.start): T.start}
    queue = deque([(T1.start, T2.start)])

    def get(pair: Tuple[int, int]) -> int:
        state = index.get(pair)
        if state is None:
            state = T.add_state(pair)
            index[pair] = state
            queue.append(pair)
            if pair == (DONE, DONE):
                T.accepting.add(state)
        return state

    def moves(M: Transducer, s: int) -> List[Tuple[Letter, int]]:
        if s == DONE:
            return [((BOX, BOX), DONE)]
        return [(letter, t) for letter, targets in M.transitions.get(s, {}).items() for t in targets]

    while queue:
        s1, s2 = queue.popleft()
        here = index[(s1, s2)]
        if s1 != DONE:
            for t1 in T1.epsilon.get(s1, ()):
                T.epsilon[here].add(get((t1, s2)))
            if s1 in T1.accepting:
                T.epsilon[here].add(get((DONE, s2)))
        if s2 != DONE:
            for t2 in T2.epsilon.get(s2, ()):
                T.epsilon[here].add(get((s1, t2)))
            if s2 in T2.accepting:
                T.epsilon[here].add(get((s1, DONE)))
        if s1 == DONE and s2 == DONE:
            continue
        for (a, b), t1 in moves(T1, s1):
            for (b2, c), t2 in moves(T2, s2):
                if b != b2 or (t1 == DONE and t2 == DONE):
                    continue
                target = get((t1, t2))
                if a == BOX and c == BOX:
                    T.epsilon[here].add(target)
                else:
                    T.add(here, (a, c), target)
    return T


def equivalent(T1: Transducer, T2: Transducer, state_cap: int = 200_000) -> Optional[List[Letter]]:
    """``None`` if both recognize the same pairs, else the shortest, lexicographically first witness."""
    start = (T1.closure([T1.start]), T2.closure([T2.start]))
    previous: Dict[Tuple[FrozenSet[int], FrozenSet[int]], Any] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        S1, S2 = node
        if bool(S1 & T1.accepting) != bool(S2 & T2.accepting):
            witness: List[Letter] = []
            while previous[node] is not None:
                node, letter = previous[node]
                witness.append(letter)
            return witness[::-1]
        letters = sorted(
            {l for s in S1 for l in T1.transitions.get(s, {})} | {l for s in S2 for l in T2.transitions.get(s, {})}
        )
        for letter in letters:
            nxt = (T1.step(S1, letter), T2.step(S2, letter))
            if nxt in previous:
                continue
            if len(previous) >= state_cap:
                raise StateCapExceeded(state_cap)
            previous[nxt] = (node, letter)
            queue.append(nxt)
    return None


# --- the verification pass -----------------------------------------------------------


@dataclass
class CycleResult:
    tile_type: int
    edge: int
    faces: Tuple[int, ...]
    ok: bool
    witness: Optional[List[Letter]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.tile_type,
            "edge": self.edge,
            "faces": list(self.faces),
            "ok": self.ok,
            "witness": [list(letter) for letter in self.witness] if self.witness is not None else None,
        }


@dataclass
class VerificationReport:
    """Outcome of verifying a GRTS against its schema."""

    transducers: Dict[Tuple[int, int], int] = field(default_factory=dict)
    cycles: List[CycleResult] = field(default_factory=list)
    witnesses: List[str] = field(default_factory=list)
    preverify: str = "skipped"
    full_dist_check: bool = False
    counterexample: Optional[Counterexample] = None

    @property
    def ok(self) -> bool:
        return not self.witnesses

    def fail(self, message: str, counterexample: Optional[Counterexample]) -> None:
        self.witnesses.append(message)
        if self.counterexample is None:
            self.counterexample = counterexample

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "transducers": [
                {"type": t, "face": f, "states": n} for (t, f), n in sorted(self.transducers.items())
            ],
            "cycles": [c.to_dict() for c in self.cycles],
            "witnesses": list(self.witnesses),
            "preverify": self.preverify,
            "full_dist_check": self.full_dist_check,
        }


def check_cycles(
    rts: Rts,
    schema: HoneycombSchema,
    transducers: Dict[Tuple[int, int], Transducer],
    state_cap: int = 50_000,
) -> List[CycleResult]:
    """Compose the neighbor transducers around every edge and compare with the identity."""
    offset = root_offset(schema)
    results = []
    for t in range(schema.type_count):
        identity = identity_transducer(rts, t, offset)
        for cycle in schema.edge_cycles[t]:
            composed = transducers[(t, cycle.faces[0])]
            for tile_type, face in zip(cycle.types[1:], cycle.faces[1:]):
                composed = compose(composed, transducers[(tile_type, face)], state_cap)
            witness = equivalent(identity, composed, 4 * state_cap)
            results.append(CycleResult(t, cycle.edge, cycle.faces, witness is None, witness))
            if witness is not None:
                logger.info("cycle of type %d around edge %d fails on %s", t, cycle.edge, witness)
    return results


def _all_words(rts: Rts, depth: int) -> Iterator[Word]:
    frontier = [(Word(r), q) for r, q in enumerate(rts.roots)]
    for level in range(depth + 1):
        nxt = []
        for word, q in frontier:
            yield word
            if level < depth:
                nxt.extend((word.child(face), child) for face, child in rts.states[q].children())
        frontier = nxt


def full_distance_check(rts: Rts, schema: HoneycombSchema, depth: int, budget: int = 10_000) -> Optional[Tuple[Word, str]]:
    """Follow every face of every tree word up to ``depth``; the first failing word, if any."""
    for word in _all_words(rts, depth):
        for face in range(schema.face_counts[rts.type_of(rts.state_of(word))]):
            try:
                word_neighbor(rts, word, face, budget)
            except (DistanceViolation, BudgetExceeded, RtsError) as exc:
                return word, str(exc)
    return None


def verify_rts(
    rts: Rts,
    schema: HoneycombSchema,
    config: LearnerConfig = LearnerConfig(),
    learner: Optional[Learner] = None,
    threads: int = 1,
) -> VerificationReport:
    """Run every check on ``rts`` and collect the failures with witnesses.

    Raises:
        StateCapExceeded: If a transducer or a composition outgrows ``config.state_cap``.
    """
    report = VerificationReport(full_dist_check=config.full_dist_check)
    offset = root_offset(schema)
    try:
        rts.validate_structure(schema)
    except RtsError as exc:
        report.fail(f"structure: {exc}", None)
        return report
    if learner is None:
        learner = Learner(schema, config)
        learner.expand(config.ball_radius)

    def at(word: Word, reason: str) -> Counterexample:
        cell = learner.cell_of(word)  # type: ignore[union-attr]
        return Counterexample(word.root, cell.id, cell.dist, reason, word)

    found = learner.preverify(rts)
    report.preverify = "ok" if found is None else str(found)
    if found is not None:
        report.fail(f"preverify: {found}", found)
        return report

    if config.full_dist_check:
        failure = full_distance_check(rts, schema, config.full_dist_depth, config.side_budget)
        if failure is not None:
            report.fail(f"distance: {failure[1]}", at(*failure))
            return report

    pairs = [(t, f) for t in range(schema.type_count) for f in schema.faces(t)]

    def build(pair: Tuple[int, int]) -> Any:
        builder = NeighborTransducerBuilder(rts, schema, pair[0], pair[1], config.state_cap, config.side_budget)
        try:
            return builder.build()
        except StateCapExceeded:
            raise
        except (VerificationError, RtsError) as exc:
            return exc, builder.current

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = list(pool.map(build, pairs))
    else:
        built = [build(pair) for pair in pairs]

    transducers: Dict[Tuple[int, int], Transducer] = {}
    for pair, result in zip(pairs, built):
        if isinstance(result, Transducer):
            transducers[pair] = result
            report.transducers[pair] = len(result)
            continue
        exc, word = result
        report.fail(f"transducer {pair}: {exc}", at(word, str(exc)) if word is not None else None)
    logger.info("built %d transducers, largest %d states", len(transducers), max(report.transducers.values(), default=0))
    if not report.ok:
        return report

    report.cycles = check_cycles(rts, schema, transducers, config.state_cap)
    for cycle in report.cycles:
        if cycle.witness is not None:
            w = [a for a, _ in cycle.witness]
            report.fail(
                f"cycle of type {cycle.tile_type} around edge {cycle.edge} fails on {cycle.witness}",
                at(word_from_letters(w, offset), f"edge {cycle.edge} does not close"),
            )
    logger.info("checked %d edge cycles: %d failed", len(report.cycles), sum(not c.ok for c in report.cycles))
    return report
