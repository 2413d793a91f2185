"""
Closed manifolds built from finite-field images of the honeycomb group.

A good triple ``(P', X', R')`` of 4x4 matrices over ``F_n`` mirrors the real
generators: same orders, same relation, and ``<X', R'>`` isomorphic to the
cell rotation group ``H`` through the generator words. The group
``G' = <P', X', R'>`` then describes a manifold with one cell per left coset
of ``H'``, and subgroups acting freely on the cosets give smaller quotients.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from honeycomb.algebra import (
    FieldMatrix,
    GaloisField,
    GroupEnumeration,
    element_order,
    evaluate_word,
    galois_field,
    generate_group,
)
from honeycomb.config import SearchConfig
from honeycomb.errors import CapExceeded, LocalStructureViolation, NoRoots, QuotientError
from honeycomb.geometry import CellCombinatorics, SchlafliSymbol, combinatorics_for, generator_triple
from honeycomb.hashing import digest
from honeycomb.schema import HoneycombSchema, validate

logger = logging.getLogger(__name__)

MINIMAL_POLYNOMIALS = {3: (1, -1), 4: (1, 0, -2), 5: (1, -1, -1), 6: (1, 0, -3)}
"""Minimal polynomials of ``2cos(pi/m)``, highest degree first."""

Permutation = Tuple[int, ...]

FORMULAS = ("right", "mirrored")


def require_roots(sym: SchlafliSymbol, F: GaloisField) -> None:
    """Check that ``F`` holds the rotation traces the symbol needs.

    A rotation of order ``m`` has trace ``1 + 2cos(2pi/m) = (2cos(pi/m))^2 - 1``.
    For ``m`` in {3, 4, 6} that value is an integer; for ``m = 5`` it needs a
    root of ``x^2 - x - 1``.

    Raises:
        NoRoots: If a required root is missing.
    """
    for m in sorted({sym.p, sym.q, sym.r}):
        if m == 5 and not F.roots(MINIMAL_POLYNOMIALS[5]):
            raise NoRoots(f"{F} has no root of x^2 - x - 1, so no rotation of order 5 for {sym}")


# --- the block-embedded rotation group -----------------------------------------


def _dot(F: GaloisField, x: Sequence[int], y: Sequence[int]) -> int:
    acc = 0
    for a, b in zip(x, y):
        acc = F.add(acc, F.mul(a, b))
    return acc


def _cross(F: GaloisField, x: Sequence[int], y: Sequence[int]) -> Tuple[int, int, int]:
    def minor(i: int, j: int) -> int:
        return F.sub(F.mul(x[i], y[j]), F.mul(x[j], y[i]))

    return minor(1, 2), minor(2, 0), minor(0, 1)


def orthogonal_group(F: GaloisField, special: bool = False) -> List[FieldMatrix]:
    """All 3x3 matrices ``M`` over ``F`` with ``M^T M = 1``.

    Columns are chosen by backtracking: a unit column, a unit column orthogonal
    to it, and plus or minus their cross product. With ``special`` only the
    determinant 1 half is kept. In characteristic 2 both halves coincide.
    """
    units = [v for v in itertools.product(F.elements(), repeat=3) if _dot(F, v, v) == 1]
    group = []
    for c0 in units:
        for c1 in units:
            if _dot(F, c0, c1) != 0:
                continue
            cross = _cross(F, c0, c1)
            thirds = [cross] if special else sorted({cross, tuple(F.neg(v) for v in cross)})
            for c2 in thirds:
                columns = (c0, c1, c2)
                group.append(FieldMatrix(F, 3, tuple(columns[j][i] for i in range(3) for j in range(3))))
    logger.debug("%sO(3, %s) has %d elements", "S" if special else "", F, len(group))
    return group


def special_orthogonal_group(F: GaloisField) -> List[FieldMatrix]:
    """The determinant 1 matrices of :func:`orthogonal_group`."""
    return orthogonal_group(F, special=True)


def _conjugacy_classes(
    group: Sequence[FieldMatrix], members: Sequence[FieldMatrix]
) -> List[Tuple[FieldMatrix, List[FieldMatrix]]]:
    """Class representatives of ``members`` with their centralizers in ``group``."""
    seen = set()
    classes = []
    for x in members:
        if x.entries in seen:
            continue
        centralizer = []
        for g in group:
            conj = g @ x @ g.transpose()
            seen.add(conj.entries)
            if conj.entries == x.entries:
                centralizer.append(g)
        classes.append((x, centralizer))
    return classes


def _canonical_under(x: FieldMatrix, conjugators: Sequence[FieldMatrix]) -> bool:
    return all(x.entries <= (c @ x @ c.transpose()).entries for c in conjugators)


# --- good triples ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GoodTriple:
    """Finite-field images of ``P``, ``X``, ``R`` with the word isomorphism of ``H``.

    ``real_of`` maps each element of ``H'`` (by its entries) to the real
    rotation with the same canonical word.
    """

    symbol: SchlafliSymbol
    field: GaloisField
    P: FieldMatrix
    X: FieldMatrix
    R: FieldMatrix
    relation: str
    cell_group: GroupEnumeration
    real_of: Dict[Hashable, np.ndarray]

    @property
    def generators(self) -> Tuple[FieldMatrix, FieldMatrix, FieldMatrix]:
        return self.P, self.X, self.R

    def phi(self, word: Sequence[int]) -> FieldMatrix:
        """Image in ``H'`` of an ``H`` word over ``(X, R)``."""
        return evaluate_word((self.X, self.R), word)  # type: ignore[return-value]

    def orders(self) -> Tuple[Optional[int], ...]:
        cap = 4 * max(self.symbol.as_tuple())
        return tuple(
            element_order(M, cap)
            for M in (self.P, self.X, self.X @ self.P, self.R, self.R @ self.X)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {name: M.to_codes() for name, M in (("P", self.P), ("X", self.X), ("R", self.R))}


def word_isomorphism(
    cell_group: GroupEnumeration, generators: Tuple[FieldMatrix, FieldMatrix]
) -> Optional[Tuple[GroupEnumeration, Dict[Hashable, np.ndarray]]]:
    """Check that the word map ``H -> <generators>`` is an isomorphism.

    Returns the enumerated image group and the inverse map, or ``None``.
    """
    try:
        image_group = generate_group(generators, cap=len(cell_group))
    except CapExceeded:
        return None
    if len(image_group) != len(cell_group):
        return None
    images: Dict[Hashable, FieldMatrix] = {
        key: evaluate_word(generators, word) for key, word in cell_group.words.items()  # type: ignore[misc]
    }
    if len({m.entries for m in images.values()}) != len(cell_group):
        return None
    for key, h in cell_group.elements.items():
        for index, g in enumerate(cell_group.generators):
            product = images.get(cell_group.key(h @ g))
            if product is None or (images[key] @ generators[index]) != product:
                return None
    real_of = {images[key].entries: cell_group.elements[key] for key in cell_group.elements}
    return image_group, real_of


def _nullspace(F: GaloisField, rows: List[List[int]], ncols: int) -> List[List[int]]:
    rows = [row[:] for row in rows if any(row)]
    pivots: List[int] = []
    rank = 0
    for col in range(ncols):
        if rank == len(rows):
            break
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        scale = F.inv(rows[rank][col])
        rows[rank] = [F.mul(scale, v) for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                factor = rows[i][col]
                rows[i] = [F.sub(v, F.mul(factor, w)) for v, w in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        vector = [0] * ncols
        vector[free] = 1
        for i, col in enumerate(pivots):
            vector[col] = F.neg(rows[i][free])
        basis.append(vector)
    return basis


def _p_equations(F: GaloisField, X: FieldMatrix, R: FieldMatrix, relation: str) -> List[List[int]]:
    """Linear equations on the 16 entries of ``P'``: self-adjointness and the relation."""
    n = 4
    sign = [1, 1, 1, F.neg(1)]
    rows = []
    for i in range(n):
        for j in range(n):
            row = [0] * 16
            row[i * n + j] = F.add(row[i * n + j], 1)
            row[j * n + i] = F.sub(row[j * n + i], F.mul(sign[i], sign[j]))
            rows.append(row)
    RX = R @ X
    XR = X @ R
    for i in range(n):
        for j in range(n):
            row = [0] * 16
            for k in range(n):
                for l in range(n):
                    if relation == "PX=RXPR":
                        left = X[l, j].code if i == k else 0
                        right = F.mul(RX[i, k].code, R[l, j].code)
                    else:
                        left = X[i, k].code if l == j else 0
                        right = F.mul(R[i, k].code, XR[l, j].code)
                    row[k * n + l] = F.sub(F.add(row[k * n + l], left), right)
            rows.append(row)
    return rows


def _solutions(F: GaloisField, basis: List[List[int]]) -> Iterator[FieldMatrix]:
    for coefficients in itertools.product(F.elements(), repeat=len(basis)):
        if not any(coefficients):
            continue
        vector = [0] * 16
        for c, b in zip(coefficients, basis):
            if c:
                vector = [F.add(v, F.mul(c, w)) for v, w in zip(vector, b)]
        yield FieldMatrix(F, 4, tuple(vector))


def candidate_triples(sym: SchlafliSymbol, F: GaloisField, config: SearchConfig) -> Iterator[GoodTriple]:
    """Yield every triple passing the order, relation and isomorphism checks.

    Pairs ``(X', R')`` are drawn from ``O(3, F)``, so reflections of
    determinant -1 may stand in for half-turns; they are taken up to
    simultaneous conjugation in ``O(3, F)``. ``P'`` ranges over the solutions
    of its linear system.

    Raises:
        NoRoots: If ``F`` lacks a required rotation trace.
    """
    require_roots(sym, F)
    real = generator_triple(sym)
    cell = combinatorics_for(sym)
    rotations = orthogonal_group(F)
    identity3 = FieldMatrix.identity(F, 3)
    involutions = [M for M in rotations if M != identity3 and (M @ M) == identity3]
    spins = [M for M in rotations if element_order(M, sym.q) == sym.q]
    identity4 = FieldMatrix.identity(F, 4)
    for x3, centralizer in _conjugacy_classes(rotations, involutions):
        for r3 in spins:
            if element_order(r3 @ x3, 2 * sym.p) != real.face_order:
                continue
            if not _canonical_under(r3, centralizer):
                continue
            X, R = FieldMatrix.block(x3), FieldMatrix.block(r3)
            checked = word_isomorphism(cell.group, (X, R))
            if checked is None:
                logger.debug("rejected X'=%s R'=%s: <X', R'> is not the cell group", x3.rows(), r3.rows())
                continue
            image_group, real_of = checked
            basis = _nullspace(F, _p_equations(F, X, R, real.relation), 16)
            space = F.size ** len(basis)
            if space > config.max_solution_space:
                logger.warning("skipping a solution space of %d candidates for P'", space)
                continue
            for P in _solutions(F, basis):
                if P == identity4 or (P @ P) != identity4:
                    continue
                if element_order(X @ P, 2 * sym.r) != real.edge_order:
                    continue
                yield GoodTriple(sym, F, P, X, R, real.relation, image_group, real_of)


# --- coset manifolds ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ManifoldDescription:
    """The coset manifold of a good triple: one cell per left coset ``gH'``."""

    triple: GoodTriple
    group: GroupEnumeration
    representatives: Tuple[FieldMatrix, ...]
    coset_of: Dict[Hashable, int]

    @property
    def cells(self) -> int:
        return len(self.representatives)

    def coset(self, g: FieldMatrix) -> int:
        return self.coset_of[g.entries]

    def permutation(self, g: FieldMatrix) -> Permutation:
        """Action of ``g`` on cosets by left multiplication."""
        return tuple(self.coset_of[(g @ rep).entries] for rep in self.representatives)


def enumerate_cells(triple: GoodTriple, cap: int = 1_000_000) -> ManifoldDescription:
    """Enumerate ``G'`` and split it into left cosets of ``H'``.

    Each coset is represented by its first element in breadth-first word order.

    Raises:
        CapExceeded: If ``G'`` is larger than ``cap``.
    """
    group = generate_group(triple.generators, cap)
    cell_elements = list(triple.cell_group)
    representatives: List[FieldMatrix] = []
    coset_of: Dict[Hashable, int] = {}
    for key, g in group.elements.items():
        if key in coset_of:
            continue
        index = len(representatives)
        representatives.append(g)
        for h in cell_elements:
            coset_of[(g @ h).entries] = index
    if len(representatives) * len(cell_elements) != len(group):
        raise QuotientError(f"|G'| = {len(group)} is not a multiple of |H'| = {len(cell_elements)}")
    logger.info(
        "%s over %s: |G'| = %d, %d cells", triple.symbol, triple.field, len(group), len(representatives)
    )
    return ManifoldDescription(triple, group, tuple(representatives), coset_of)


@dataclass(frozen=True)
class Quotient:
    """A subgroup ``K'`` acting freely on the cosets, given by its permutations.

    ``members`` maps each permutation to the one element of ``K'`` inducing it.
    """

    generators: Tuple[FieldMatrix, ...]
    permutations: FrozenSet[Permutation]
    cells: int
    members: Dict[Permutation, FieldMatrix] = field(default_factory=dict, compare=False, repr=False)

    @property
    def order(self) -> int:
        return len(self.permutations)

    @classmethod
    def trivial(cls, m: ManifoldDescription) -> "Quotient":
        identity = tuple(range(m.cells))
        return cls((), frozenset([identity]), m.cells, {identity: FieldMatrix.identity(m.triple.field, 4)})


def _compose(a: Permutation, b: Permutation) -> Permutation:
    return tuple(a[x] for x in b)


def _fixed_point_free(perm: Permutation) -> bool:
    return all(x != i for i, x in enumerate(perm))


def stabilizer_conjugates(m: ManifoldDescription) -> FrozenSet[Hashable]:
    """Non-identity elements of ``G'`` fixing some face or some edge of the manifold.

    The face group ``<R'X', P'>`` and the edge group ``<X'P', X'>`` are
    conjugated by one representative of each of their left cosets.
    """
    triple = m.triple
    identity = FieldMatrix.identity(triple.field, 4)
    bad = set()
    for generators in ((triple.R @ triple.X, triple.P), (triple.X @ triple.P, triple.X)):
        stabilizer = list(generate_group(generators, cap=len(m.group)))
        covered = set()
        for g in m.group:
            if g.entries in covered:
                continue
            covered.update((g @ s).entries for s in stabilizer)
            g_inv = g.minkowski_adjoint()
            bad.update((g @ s @ g_inv).entries for s in stabilizer if s != identity)
    logger.debug("%d elements of G' fix a face or an edge", len(bad))
    return frozenset(bad)


def _closure(
    generators: Sequence[Tuple[FieldMatrix, Permutation]],
    cells: int,
    forbidden: FrozenSet[Hashable] = frozenset(),
) -> Optional[Dict[Permutation, FieldMatrix]]:
    """The subgroup generated, closed on matrices and tracked by permutation.

    Returns ``None`` once the subgroup stops acting freely: a product fixes a
    cell, lies in ``forbidden``, or induces the permutation of another element.
    """
    identity_perm = tuple(range(cells))
    identity = FieldMatrix.identity(generators[0][0].field, 4)
    members = {identity_perm: identity}
    seen = {identity.entries}
    frontier = [(identity, identity_perm)]
    while frontier:
        nxt = []
        for element, perm in frontier:
            for g, gen_perm in generators:
                product = element @ g
                if product.entries in seen:
                    continue
                image = _compose(perm, gen_perm)
                if product.entries in forbidden or image in members or not _fixed_point_free(image):
                    return None
                if len(members) >= cells:
                    return None
                seen.add(product.entries)
                members[image] = product
                nxt.append((product, image))
        frontier = nxt
    if cells % len(members):
        return None
    return members


def find_quotients(
    m: ManifoldDescription,
    config: Optional[SearchConfig] = None,
    accept: Optional[Callable[[Quotient], bool]] = None,
) -> List[Quotient]:
    """Subgroups of ``G'`` with at most two generators acting freely on the manifold.

    A subgroup qualifies when no non-identity element fixes a cell, a face or
    an edge. The trivial subgroup comes first; afterwards one subgroup per
    distinct cell count, in discovery order. With ``accept``, a subgroup it
    rejects is passed over and the search keeps looking for that cell count.

    Raises:
        CapExceeded: If more than ``group_cap`` subgroups are examined.
    """
    config = config or SearchConfig()
    cells = m.cells
    forbidden = stabilizer_conjugates(m)
    free: List[Tuple[FieldMatrix, Permutation]] = []
    for g in m.group:
        perm = m.permutation(g)
        if _fixed_point_free(perm) and g.entries not in forbidden:
            free.append((g, perm))

    found = [Quotient.trivial(m)]
    counts = {cells}
    seen_groups = set()

    def consider(generators: Tuple[Tuple[FieldMatrix, Permutation], ...]) -> Optional[Dict[Permutation, FieldMatrix]]:
        members = _closure(generators, cells, forbidden)
        if members is None:
            return None
        key = frozenset(members)
        if key in seen_groups:
            return None
        seen_groups.add(key)
        count = cells // len(members)
        if count not in counts:
            quotient = Quotient(tuple(g for g, _ in generators), key, count, members)
            if accept is None or accept(quotient):
                counts.add(count)
                found.append(quotient)
            else:
                logger.debug("passed over a subgroup of order %d", len(members))
        return members

    cyclic: List[Tuple[FieldMatrix, Permutation, Dict[Permutation, FieldMatrix]]] = []
    for g, perm in free:
        members = consider(((g, perm),))
        if members is not None:
            cyclic.append((g, perm, members))
    examined = len(cyclic)
    if config.max_quotient_generators >= 2:
        for (g1, p1, s1), (g2, p2, s2) in itertools.combinations(cyclic, 2):
            if p2 in s1 or p1 in s2:
                continue
            examined += 1
            if examined > config.group_cap:
                raise CapExceeded("quotient subgroup search", config.group_cap)
            consider(((g1, p1), (g2, p2)))
    logger.info("quotients of the %d-cell manifold: %s", cells, sorted(counts, reverse=True))
    return found


# --- schemas ---------------------------------------------------------------------------


def _orbits(cells: int, permutations: FrozenSet[Permutation]) -> Tuple[List[int], List[int]]:
    orbit_of = [-1] * cells
    reps: List[int] = []
    for c in range(cells):
        if orbit_of[c] >= 0:
            continue
        for perm in permutations:
            orbit_of[perm[c]] = len(reps)
        reps.append(c)
    return reps, orbit_of


def _glue(
    m: ManifoldDescription, quotient: Quotient, formula: str
) -> Optional[HoneycombSchema]:
    triple = m.triple
    real = generator_triple(triple.symbol)
    cell: CellCombinatorics = combinatorics_for(triple.symbol)
    reps, orbit_of = _orbits(m.cells, quotient.permutations)
    perm_to_element = quotient.members
    face_images = [triple.phi(cell.group.word_of(rep)) for rep in cell.face_representatives]
    pairing = {}
    matrices = {}
    for T, t0 in enumerate(reps):
        g0 = m.representatives[t0]
        for f, rep in enumerate(cell.face_representatives):
            if formula == "right":
                x = g0 @ face_images[f] @ triple.P
            else:
                x = g0 @ triple.P @ face_images[f]
            c = m.coset(x)
            T2 = orbit_of[c]
            g1 = m.representatives[reps[T2]]
            h = None
            for perm, k in perm_to_element.items():
                if perm[reps[T2]] == c:
                    candidate = g1.minkowski_adjoint() @ k.minkowski_adjoint() @ x
                    if candidate.entries in triple.real_of:
                        h = candidate
                        break
            if h is None:
                return None
            h_real = triple.real_of[h.entries]
            if formula == "right":
                C = rep @ real.P @ np.linalg.inv(h_real)
            else:
                C = real.P @ rep @ np.linalg.inv(h_real)
            f2 = cell.locate_face(np.linalg.solve(C, cell.face_centers[f]))
            if f2 is None:
                return None
            pairing[(T, f)] = (T2, f2)
            matrices[(T, f)] = C
    return HoneycombSchema(
        triple.symbol, real.kind, tuple(cell.face_count for _ in reps), pairing, matrices
    )


def check_local_structure(schema: HoneycombSchema) -> None:
    """Every edge of every root must be surrounded by ``r`` distinct cells.

    Raises:
        LocalStructureViolation: With the offending type and edge.
    """
    from honeycomb.graph import HoneycombGraph

    r = schema.symbol.r
    for t in range(schema.type_count):
        graph = HoneycombGraph(schema, t)
        graph.ensure_ball(graph.root, 2)
        for cycle in schema.edge_cycles[t]:
            current = graph.root
            visited = []
            for f in cycle.faces:
                current = graph.resolve(current, f)
                visited.append(current.id)
            if current.id != graph.root.id or len(set(visited)) != r:
                raise LocalStructureViolation(
                    f"type {t}, edge {cycle.edge}: {len(set(visited))} distinct cells around the edge, expected {r}"
                )


@dataclass(frozen=True, eq=False)
class GluedSchema:
    schema: HoneycombSchema
    formula: str


def schema_from_manifold(m: ManifoldDescription, quotient: Optional[Quotient] = None) -> GluedSchema:
    """Glue the cells (or the ``K'``-orbits of cells) into a schema.

    The neighbor of type ``t`` across face ``f`` is the coset of
    ``rep(t) phi(I_f) P'``; writing it as ``k rep(t') h'`` gives the real
    gluing ``I_f P h^-1``. The mirrored product ``rep(t) P' phi(I_f)`` is the
    fallback when the first formula does not validate.

    Raises:
        LocalStructureViolation: If neither formula gives a valid schema.
    """
    quotient = quotient or Quotient.trivial(m)
    problems = []
    for formula in FORMULAS:
        schema = _glue(m, quotient, formula)
        if schema is None:
            problems.append(f"{formula}: coset arithmetic failed")
            continue
        report = validate(schema)
        if not report.ok:
            problems.append(f"{formula}: {', '.join(report.kinds())}")
            continue
        check_local_structure(schema)
        logger.debug("glued %d cells with the %s formula", schema.type_count, formula)
        return GluedSchema(schema, formula)
    raise LocalStructureViolation("; ".join(problems))


def isomorphism_hash(schema: HoneycombSchema) -> str:
    """Digest of the face pairing, minimized over relabelings of the types."""
    best: Optional[str] = None
    for start in range(schema.type_count):
        order = {start: 0}
        queue = [start]
        for t in queue:
            for f in schema.faces(t):
                t2 = schema.neighbor_type(t, f)
                if t2 not in order:
                    order[t2] = len(order)
                    queue.append(t2)
        for t in range(schema.type_count):
            order.setdefault(t, len(order))
        by_label = sorted(range(schema.type_count), key=order.__getitem__)
        text = ";".join(
            f"{order[t]}.{f}>{order[schema.neighbor(t, f)[0]]}.{schema.neighbor(t, f)[1]}"
            for t in by_label
            for f in schema.faces(t)
        )
        if best is None or text < best:
            best = text
    return digest(best or "")


# --- search driver -------------------------------------------------------------------


@dataclass
class ManifoldReport:
    """A discovered manifold, its schema and its quotients."""

    manifold: ManifoldDescription
    schema: HoneycombSchema
    coset_formula: str
    isomorphism_hash: str
    quotients: List[Quotient] = field(default_factory=list)
    quotient_schemas: Dict[int, HoneycombSchema] = field(default_factory=dict)

    @property
    def cells(self) -> int:
        return self.manifold.cells

    def quotient_counts(self) -> List[int]:
        return [q.cells for q in self.quotients if q.order > 1]

    def to_dict(self) -> Dict[str, Any]:
        triple = self.manifold.triple
        return {
            "symbol": list(triple.symbol.as_tuple()),
            "prime": triple.field.prime,
            "field_size": triple.field.size,
            "cells": self.cells,
            "quotients": self.quotient_counts(),
            "canonical_hash": self.schema.canonical_hash,
            "isomorphism_hash": self.isomorphism_hash,
            "group_order": len(self.manifold.group),
            "cell_group_order": len(triple.cell_group),
            "coset_formula": self.coset_formula,
            "relation": triple.relation,
            "triple": triple.to_dict(),
        }


def _glues_into(m: ManifoldDescription, schemas: Dict[int, HoneycombSchema]) -> Callable[[Quotient], bool]:
    """Accept a quotient when it glues into a valid schema, keeping the schema by cell count."""

    def accept(quotient: Quotient) -> bool:
        try:
            schemas[quotient.cells] = schema_from_manifold(m, quotient).schema
        except LocalStructureViolation as exc:
            logger.debug("quotient with %d cells does not glue: %s", quotient.cells, exc)
            return False
        return True

    return accept


def find_manifolds(
    sym: SchlafliSymbol,
    prime: int,
    degree: int = 1,
    config: Optional[SearchConfig] = None,
    with_quotients: bool = True,
) -> List[ManifoldReport]:
    """Search good triples over ``F_{prime^degree}`` and build their manifolds.

    Candidates whose schema does not validate are discarded; isomorphic
    manifolds are reported once. The search stops after ``config.limit``
    manifolds.

    Raises:
        NoRoots: If the field lacks a required rotation trace.
        CapExceeded: If nothing was found and some candidate group overflowed.
    """
    config = config or SearchConfig()
    F = galois_field(prime, degree)
    reports: List[ManifoldReport] = []
    hashes = set()
    overflow: Optional[CapExceeded] = None
    for triple in candidate_triples(sym, F, config):
        try:
            manifold = enumerate_cells(triple, config.group_cap)
        except CapExceeded as exc:
            logger.warning("skipping a candidate whose group exceeds %d elements", config.group_cap)
            overflow = exc
            continue
        try:
            glued = schema_from_manifold(manifold)
        except LocalStructureViolation as exc:
            logger.debug("candidate rejected: %s", exc)
            continue
        iso = isomorphism_hash(glued.schema)
        if iso in hashes:
            continue
        hashes.add(iso)
        report = ManifoldReport(manifold, glued.schema, glued.formula, iso)
        if with_quotients:
            report.quotients = find_quotients(manifold, config, accept=_glues_into(manifold, report.quotient_schemas))
        logger.info("manifold %s: %d cells, quotients %s", iso, report.cells, report.quotient_counts())
        reports.append(report)
        if len(reports) >= config.limit:
            break
    if not reports and overflow is not None:
        raise overflow
    return reports


def find_good_triples(sym: SchlafliSymbol, prime: int, degree: int = 1, limit: int = 4) -> List[GoodTriple]:
    """Good triples over ``F_{prime^degree}``, one per non-isomorphic manifold."""
    config = SearchConfig(limit=limit)
    return [report.manifold.triple for report in find_manifolds(sym, prime, degree, config, with_quotients=False)]
