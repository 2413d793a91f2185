"""
Real generators of the rotation group of a {p,q,r} honeycomb, and the
combinatorics of its cell.

Points and isometries live in the hyperboloid model: 4-vectors with the form
``diag(1, 1, 1, -1)``, the cell center at ``(0, 0, 0, 1)``. The Euclidean
{4,3,4} case uses affine homogeneous coordinates instead, with the same cell
center.

Matrices act on column vectors and a product applies its right factor first.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from honeycomb.algebra import (
    MINKOWSKI,
    GroupEnumeration,
    element_order,
    generate_group,
    is_minkowski_isometry,
    mat_eq_within,
)
from honeycomb.config import DEFAULT_TOLERANCES
from honeycomb.errors import CycleOpen, DegenerateForm, SearchFailed

logger = logging.getLogger(__name__)

PLATONIC = {(3, 3): (4, 6), (3, 4): (8, 12), (3, 5): (20, 30), (4, 3): (6, 12), (5, 3): (12, 30)}
"""Face and edge counts of each Platonic solid {p,q}."""

CELL_CENTER = np.array([0.0, 0.0, 0.0, 1.0])
POINT_TOLERANCE = 1e-6

HYPERBOLIC = "hyperbolic"
EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class SchlafliSymbol:
    """A honeycomb symbol {p,q,r}: {p,q} cells, r of them around each edge."""

    p: int
    q: int
    r: int

    def __post_init__(self) -> None:
        if min(self.p, self.q, self.r) < 3:
            raise ValueError(f"{self} has an entry below 3")
        if (self.p, self.q) not in PLATONIC:
            raise ValueError(f"{{{self.p},{self.q}}} is not a Platonic solid")
        if self.kind is None:
            raise ValueError(f"{self} is spherical, only hyperbolic and Euclidean honeycombs are supported")

    @classmethod
    def parse(cls, text: str) -> "SchlafliSymbol":
        """Parse ``"4,3,5"``, ``"{4,3,5}"`` or ``"435"``."""
        cleaned = text.strip().strip("{}")
        parts = cleaned.split(",") if "," in cleaned else list(cleaned)
        try:
            p, q, r = (int(part) for part in parts)
        except ValueError as exc:
            raise ValueError(f"cannot parse Schlafli symbol {text!r}") from exc
        return cls(p, q, r)

    @property
    def kind(self) -> Optional[str]:
        det = float(np.linalg.det(gram_matrix(self)))
        if det < -1e-9:
            return HYPERBOLIC
        if abs(det) <= 1e-9:
            return EUCLIDEAN
        return None

    @property
    def face_count(self) -> int:
        return PLATONIC[(self.p, self.q)][0]

    @property
    def edge_count(self) -> int:
        return PLATONIC[(self.p, self.q)][1]

    def as_tuple(self) -> Tuple[int, int, int]:
        return self.p, self.q, self.r

    def compact(self) -> str:
        return f"{self.p}{self.q}{self.r}"

    def __str__(self) -> str:
        return f"{{{self.p},{self.q},{self.r}}}"


def gram_matrix(sym: SchlafliSymbol) -> np.ndarray:
    """Gram matrix of the four simplex mirrors of ``sym``."""
    G = np.eye(4)
    for i, m in enumerate((sym.p, sym.q, sym.r)):
        G[i, i + 1] = G[i + 1, i] = -np.cos(np.pi / m)
    return G


def minkowski_inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(x @ MINKOWSKI @ y)


@dataclass(frozen=True, eq=False)
class MirrorSet:
    """Unit normals ``n0..n3`` (rows of ``normals``) reproducing a Gram matrix."""

    normals: np.ndarray
    gram: np.ndarray

    def reflection(self, index: int) -> np.ndarray:
        n = self.normals[index]
        return np.eye(4) - 2.0 * np.outer(n, MINKOWSKI @ n)

    def reflections(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.reflection(i) for i in range(4))

    def inner_products(self) -> np.ndarray:
        return self.normals @ MINKOWSKI @ self.normals.T


def mirrors_from_gram(G: np.ndarray, eps: float = DEFAULT_TOLERANCES.epsilon) -> MirrorSet:
    """Place the mirrors so that ``n0..n2`` fix the cell center ``(0,0,0,1)``.

    Raises:
        DegenerateForm: If ``G`` does not have signature (3,1).
    """
    try:
        L = np.linalg.cholesky(G[:3, :3])
    except np.linalg.LinAlgError as exc:
        raise DegenerateForm("the cell block of the Gram matrix is not positive definite") from exc
    u = np.linalg.solve(L, G[:3, 3])
    norm2 = float(u @ u)
    if norm2 <= 1.0 + eps:
        raise DegenerateForm(f"Gram matrix is not of signature (3,1) (|u|^2 = {norm2:.9f})")
    normals = np.zeros((4, 4))
    normals[:3, :3] = L
    normals[3, :3] = u
    normals[3, 3] = np.sqrt(norm2 - 1.0)
    return MirrorSet(normals, G.copy())


def euclidean_reflections() -> Tuple[np.ndarray, ...]:
    """Affine mirrors of the cube ``[-1/2, 1/2]^3`` in homogeneous coordinates."""
    r0 = np.diag([1.0, -1.0, 1.0, 1.0])
    r1 = np.eye(4)[[1, 0, 2, 3]]
    r2 = np.eye(4)[[2, 1, 0, 3]]
    r3 = np.diag([1.0, 1.0, -1.0, 1.0])
    r3[2, 3] = 1.0
    return r0, r1, r2, r3


def _fixed_point(normals: np.ndarray, indices: Sequence[int]) -> np.ndarray:
    """The point of the hyperboloid orthogonal to the given mirror normals."""
    rows = normals[list(indices)] @ MINKOWSKI
    _, _, vt = np.linalg.svd(rows)
    x = vt[-1]
    norm2 = -minkowski_inner(x, x)
    if norm2 <= 0:
        raise DegenerateForm(f"mirrors {list(indices)} do not meet inside hyperbolic space")
    x = x / np.sqrt(norm2)
    return x if x[3] > 0 else -x


def points_close(x: np.ndarray, y: np.ndarray, tol: float = POINT_TOLERANCE) -> bool:
    scale = max(1.0, float(np.abs(x).max()))
    return bool(np.max(np.abs(x - y)) <= tol * scale)


def locate_point(points: Sequence[np.ndarray], x: np.ndarray, tol: float = POINT_TOLERANCE) -> Optional[int]:
    for index, candidate in enumerate(points):
        if points_close(candidate, x, tol):
            return index
    return None


def is_rigid_motion(M: np.ndarray, eps: float = 1e-9) -> bool:
    """Orientation-preserving affine isometry in homogeneous coordinates."""
    if not np.allclose(M[3], [0.0, 0.0, 0.0, 1.0], atol=eps):
        return False
    B = M[:3, :3]
    return bool(np.allclose(B.T @ B, np.eye(3), atol=eps) and np.linalg.det(B) > 0)


@dataclass(frozen=True, eq=False)
class GeneratorTriple:
    """The generators ``P``, ``X``, ``R`` and the flag they are built from.

    ``relation`` names the form of the braid-like relation that holds for the
    matrices: ``"PX=RXPR"`` or ``"XP=RPXR"`` read as matrix products.
    """

    symbol: SchlafliSymbol
    kind: str
    P: np.ndarray
    X: np.ndarray
    R: np.ndarray
    reflections: Tuple[np.ndarray, ...]
    words: Dict[str, Tuple[int, ...]]
    relation: str
    edge_order: int
    face_order: int
    cell_center: np.ndarray
    face_center: np.ndarray
    second_face_center: np.ndarray
    edge_midpoint: np.ndarray

    @property
    def generators(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.P, self.X, self.R

    def face_rotation(self) -> np.ndarray:
        """The rotation about the cell center and ``f0`` of order ``p``."""
        return self.R @ self.X

    def edge_rotation(self) -> np.ndarray:
        """The rotation about the designated edge, of order ``r``."""
        return self.X @ self.P


def _words() -> Iterator[Tuple[int, ...]]:
    for length in (2, 4):
        for word in itertools.product(range(4), repeat=length):
            if all(a != b for a, b in zip(word, word[1:])):
                yield word


def _search(
    reflections: Sequence[np.ndarray], accept: Callable[[np.ndarray], bool], name: str
) -> Tuple[np.ndarray, Tuple[int, ...]]:
    for word in _words():
        M = np.eye(4)
        for index in word:
            M = M @ reflections[index]
        if accept(M):
            logger.debug("generator %s realized by reflections %s", name, word)
            return M, word
    raise SearchFailed(f"no product of at most 4 reflections realizes {name}")


@lru_cache(maxsize=None)
def generator_triple(sym: SchlafliSymbol) -> GeneratorTriple:
    """Find ``P``, ``X``, ``R`` among short reflection products.

    ``X`` is the half-turn swapping the faces ``f0`` and ``f1`` at the edge,
    ``R`` the rotation about a vertex taking ``f1`` to ``f0``, and ``P`` the
    half-turn about the edge-to-face-center line of ``f0``, swapping the cell
    with its neighbor.

    Raises:
        SearchFailed: If some generator is not found or fails validation.
    """
    eps = DEFAULT_TOLERANCES.epsilon
    kind = sym.kind
    o = CELL_CENTER
    if kind == EUCLIDEAN:
        reflections = euclidean_reflections()
        f0 = np.array([0.0, 0.0, 0.5, 1.0])
        mid = np.array([0.5, 0.0, 0.5, 1.0])
    else:
        mirrors = mirrors_from_gram(gram_matrix(sym))
        reflections = mirrors.reflections()
        f0 = _fixed_point(mirrors.normals, (0, 1, 3))
        mid = _fixed_point(mirrors.normals, (0, 2, 3))
    identity = np.eye(4)

    def fixes(M: np.ndarray, x: np.ndarray) -> bool:
        return points_close(M @ x, x)

    def involution(M: np.ndarray) -> bool:
        return mat_eq_within(M @ M, identity, eps) and not mat_eq_within(M, identity, eps)

    X, x_word = _search(
        reflections, lambda M: involution(M) and fixes(M, o) and fixes(M, mid) and not fixes(M, f0), "X"
    )
    f1 = X @ f0
    R, r_word = _search(
        reflections,
        lambda M: fixes(M, o) and points_close(M @ f1, f0) and element_order(M, sym.q, eps) == sym.q,
        "R",
    )
    P, p_word = _search(
        reflections, lambda M: involution(M) and fixes(M, mid) and fixes(M, f0) and not fixes(M, o), "P"
    )

    if mat_eq_within(P @ X, R @ X @ P @ R, eps):
        relation = "PX=RXPR"
    elif mat_eq_within(X @ P, R @ P @ X @ R, eps):
        relation = "XP=RPXR"
    else:
        raise SearchFailed(f"neither form of the generator relation holds for {sym}")

    edge_order = element_order(X @ P, 2 * sym.r, eps)
    face_order = element_order(R @ X, 2 * sym.p, eps)
    if edge_order != sym.r or face_order != sym.p:
        raise SearchFailed(f"rotation orders ({edge_order}, {face_order}) do not match {sym}")
    for name, M in (("X", X), ("R", R)):
        if not (np.allclose(M[3], o, atol=eps) and np.allclose(M[:, 3], o, atol=eps)):
            raise SearchFailed(f"{name} does not fix the cell center")
    if kind == HYPERBOLIC:
        if not all(is_minkowski_isometry(M) for M in (P, X, R)):
            raise SearchFailed("generators do not preserve the Minkowski form")
    elif not all(is_rigid_motion(M) for M in (P, X, R)):
        raise SearchFailed("generators are not rigid motions")

    logger.info("generators of %s: relation %s, edge order %d, face order %d", sym, relation, edge_order, face_order)
    return GeneratorTriple(
        symbol=sym,
        kind=kind,  # type: ignore[arg-type]
        P=P,
        X=X,
        R=R,
        reflections=tuple(reflections),
        words={"P": p_word, "X": x_word, "R": r_word},
        relation=relation,
        edge_order=edge_order,
        face_order=face_order,
        cell_center=o.copy(),
        face_center=f0,
        second_face_center=f1,
        edge_midpoint=mid,
    )


@dataclass(frozen=True)
class EdgeCycle:
    """Faces crossed while walking once around an edge, starting in ``tile_type``."""

    tile_type: int
    edge: int
    faces: Tuple[int, ...]
    types: Tuple[int, ...]
    product: np.ndarray = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.faces)


@dataclass(frozen=True, eq=False)
class CellCombinatorics:
    """Faces, edges and rotation group of the standard cell."""

    triple: GeneratorTriple
    group: GroupEnumeration
    face_centers: Tuple[np.ndarray, ...]
    face_representatives: Tuple[np.ndarray, ...]
    edges: Tuple[Tuple[int, int], ...]
    edge_midpoints: Tuple[np.ndarray, ...]
    cycles: Tuple[EdgeCycle, ...]

    @property
    def face_count(self) -> int:
        return len(self.face_centers)

    def locate_face(self, x: np.ndarray, tol: float = POINT_TOLERANCE) -> Optional[int]:
        return locate_point(self.face_centers, x, tol)

    def locate_edge(self, x: np.ndarray, tol: float = POINT_TOLERANCE) -> Optional[int]:
        return locate_point(self.edge_midpoints, x, tol)

    def faces_of_edge(self, edge: int) -> Tuple[int, int]:
        return self.edges[edge]

    def edges_of_face(self, face: int) -> List[int]:
        return [i for i, pair in enumerate(self.edges) if face in pair]


def walk_edge(
    cell: "CellCombinatorics",
    tile_type: int,
    edge: int,
    gluing: Callable[[int, int], np.ndarray],
    pairing: Callable[[int, int], Tuple[int, int]],
    stop: Callable[[int, int, int, np.ndarray], bool],
    limit: int,
) -> EdgeCycle:
    """Walk around ``edge`` of a cell of ``tile_type`` through glued neighbors.

    The walk leaves through the lower-indexed face of the edge. In each new
    cell the edge is located from its midpoint pulled back through the gluing,
    and the walk leaves through the face of that edge it did not enter by.
    ``stop(type, edge, exit_face, frame)`` ends the walk.

    Raises:
        CycleOpen: If the edge is lost or the walk does not stop within ``limit`` steps.
    """
    t, f = tile_type, cell.edges[edge][0]
    point = cell.edge_midpoints[edge]
    frame = np.eye(4)
    faces: List[int] = []
    types: List[int] = []
    for step in range(1, limit + 1):
        faces.append(f)
        types.append(t)
        C = gluing(t, f)
        frame = frame @ C
        t_next, entered = pairing(t, f)
        point = np.linalg.solve(C, point)
        local = cell.locate_edge(point)
        if local is None:
            raise CycleOpen(tile_type, edge, f"step {step} does not land on an edge of type {t_next}")
        a, b = cell.edges[local]
        if entered not in (a, b):
            raise CycleOpen(tile_type, edge, f"step {step} enters through face {entered}, not on edge {local}")
        t, f = t_next, (b if entered == a else a)
        if stop(t, local, f, frame):
            return EdgeCycle(tile_type, edge, tuple(faces), tuple(types), frame)
    raise CycleOpen(tile_type, edge, f"no return within {limit} steps")


@lru_cache(maxsize=None)
def cell_combinatorics(triple: GeneratorTriple, cap: int = 1_000_000) -> CellCombinatorics:
    """Enumerate ``H = <X, R>`` and derive faces, edges and the edge cycles.

    Faces are the ``H``-orbit of ``f0`` in breadth-first word order, each with
    the first group element reaching it. Edges are the orbit of the designated
    edge midpoint. Each cycle walks the regular honeycomb, where the neighbor
    across face ``f`` is ``I_f P`` and is entered through ``f0``; it must come
    back to the same cell and the same edge after ``r`` steps. The closing
    frame is then some rotation in ``H``, not necessarily the identity.

    Raises:
        CapExceeded: If ``H`` is larger than ``cap``.
        CycleOpen: If some edge cycle does not close after ``r`` steps.
    """
    sym = triple.symbol
    group = generate_group((triple.X, triple.R), cap)
    centers: List[np.ndarray] = []
    reps: List[np.ndarray] = []
    for h in group:
        pt = h @ triple.face_center
        if locate_point(centers, pt) is None:
            centers.append(pt)
            reps.append(h)
    edges: List[Tuple[int, int]] = []
    midpoints: List[np.ndarray] = []
    for h in group:
        pt = h @ triple.edge_midpoint
        if locate_point(midpoints, pt) is not None:
            continue
        a = locate_point(centers, h @ triple.face_center)
        b = locate_point(centers, h @ triple.second_face_center)
        if a is None or b is None:
            raise SearchFailed("edge faces are not in the face orbit")
        midpoints.append(pt)
        edges.append((min(a, b), max(a, b)))

    partial = CellCombinatorics(triple, group, tuple(centers), tuple(reps), tuple(edges), tuple(midpoints), ())
    gluings = [rep @ triple.P for rep in reps]
    o = triple.cell_center
    cycles = []
    for index in range(len(edges)):

        def back_on_edge(t: int, e: int, f: int, M: np.ndarray, mid: np.ndarray = midpoints[index]) -> bool:
            return points_close(M @ o, o) and points_close(M @ midpoints[e], mid)

        cycle = walk_edge(
            partial,
            0,
            index,
            gluing=lambda t, f: gluings[f],
            pairing=lambda t, f: (0, 0),
            stop=back_on_edge,
            limit=4 * sym.r,
        )
        if len(cycle) != sym.r:
            raise CycleOpen(0, index, f"closed after {len(cycle)} steps, expected {sym.r}")
        cycles.append(cycle)

    logger.debug("cell of %s: %d faces, %d edges, |H| = %d", sym, len(centers), len(edges), len(group))
    return CellCombinatorics(triple, group, tuple(centers), tuple(reps), tuple(edges), tuple(midpoints), tuple(cycles))


def combinatorics_for(sym: SchlafliSymbol) -> CellCombinatorics:
    """Shortcut for ``cell_combinatorics(generator_triple(sym))``."""
    return cell_combinatorics(generator_triple(sym))
