"""
Lazy generation of a honeycomb from its schema.

Cells are created on demand by :meth:`HoneycombGraph.resolve`. Each cell keeps
the isometry placing it, so a cell reached along two different paths is
recognized by comparing isometries. Lookups go through buckets keyed by the
quantized cell center; the bucket width scales with the distance from the
root so that hyperbolic growth does not outrun the tolerance.
"""

import itertools
import json
import logging
import math
from collections import defaultdict, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import networkx as nx
import numpy as np

from honeycomb.config import DEFAULT_TOLERANCES, Tolerances
from honeycomb.errors import CapExceeded, GraphError, PrecisionAmbiguity
from honeycomb.geometry import CELL_CENTER
from honeycomb.schema import HoneycombSchema

logger = logging.getLogger(__name__)

BucketKey = Tuple[int, int, Tuple[int, int, int]]

_OFFSETS = tuple(itertools.product((-1, 0, 1), repeat=3))


@dataclass(eq=False)
class Cell:
    """A generated cell: its type, placement, neighbor slots and distance bound.

    ``dist`` is the best known upper bound on the distance to the root; it only
    ever decreases.
    """

    id: int
    type: int
    isometry: np.ndarray
    neighbors: List[Optional[int]]
    dist: int

    @property
    def center(self) -> np.ndarray:
        return self.isometry @ CELL_CENTER

    def is_complete(self) -> bool:
        return all(n is not None for n in self.neighbors)

    def __repr__(self) -> str:
        return f"Cell(id={self.id}, type={self.type}, dist={self.dist})"


class HoneycombGraph:
    """The honeycomb around one root cell, generated lazily from a schema."""

    def __init__(
        self,
        schema: HoneycombSchema,
        root_type: int = 0,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
        depth_cap: int = 30,
    ) -> None:
        if not 0 <= root_type < schema.type_count:
            raise GraphError(f"root type {root_type} is not a type of {schema!r}")
        self.schema = schema
        self.tolerances = tolerances
        self.depth_cap = depth_cap
        self.cells: List[Cell] = []
        self._buckets: Dict[BucketKey, List[int]] = defaultdict(list)
        self.root = self.new_root(root_type)

    def new_root(self, tile_type: int) -> Cell:
        """Place a cell of ``tile_type`` at the identity with distance 0."""
        return self._add(tile_type, np.eye(4), 0)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells)

    def cell(self, cell_id: int) -> Cell:
        return self.cells[cell_id]

    # --- isometry store ------------------------------------------------------

    def _scale_exponent(self, center: np.ndarray) -> float:
        return math.log2(max(1.0, abs(float(center[3]))))

    def _bucket(self, tile_type: int, center: np.ndarray, exponent: int) -> BucketKey:
        width = self.tolerances.beta * (2.0 ** exponent)
        x, y, z = (int(math.floor(float(v) / width)) for v in center[:3])
        return tile_type, exponent, (x, y, z)

    def _candidate_keys(self, tile_type: int, center: np.ndarray) -> Iterator[BucketKey]:
        exact = self._scale_exponent(center)
        exponents = {int(math.floor(exact))}
        frac = exact - math.floor(exact)
        if frac < 1e-3 and exact >= 1:
            exponents.add(int(math.floor(exact)) - 1)
        if frac > 1 - 1e-3:
            exponents.add(int(math.floor(exact)) + 1)
        for exponent in sorted(exponents):
            tile, e, (x, y, z) = self._bucket(tile_type, center, exponent)
            for dx, dy, dz in _OFFSETS:
                yield tile, e, (x + dx, y + dy, z + dz)

    def lookup(self, tile_type: int, isometry: np.ndarray) -> Optional[Cell]:
        """Find the stored cell of ``tile_type`` placed by ``isometry``.

        Raises:
            PrecisionAmbiguity: If a stored cell is closer than ``beta`` but not within ``kappa``.
        """
        center = isometry @ CELL_CENTER
        scale = max(1.0, float(np.abs(isometry).max()))
        for key in self._candidate_keys(tile_type, center):
            for cell_id in self._buckets.get(key, ()):
                distance = float(np.abs(self.cells[cell_id].isometry - isometry).max()) / scale
                if distance <= self.tolerances.kappa:
                    return self.cells[cell_id]
                if distance <= self.tolerances.beta:
                    raise PrecisionAmbiguity(distance, self.tolerances.kappa, self.tolerances.beta)
        return None

    def _add(self, tile_type: int, isometry: np.ndarray, dist: int) -> Cell:
        cell = Cell(len(self.cells), tile_type, isometry, [None] * self.schema.face_counts[tile_type], dist)
        self.cells.append(cell)
        exponent = int(math.floor(self._scale_exponent(cell.center)))
        self._buckets[self._bucket(tile_type, cell.center, exponent)].append(cell.id)
        return cell

    # --- navigation ----------------------------------------------------------

    def _link(self, cell: Cell, face: int, other: Cell, other_face: int) -> None:
        for a, f, b in ((cell, face, other), (other, other_face, cell)):
            if a.neighbors[f] is None:
                a.neighbors[f] = b.id
            elif a.neighbors[f] != b.id:
                raise GraphError(f"face {f} of cell {a.id} is already linked to cell {a.neighbors[f]}, not {b.id}")
        self._relax((cell.id, other.id))

    def _relax(self, start: Iterable[int]) -> None:
        queue = deque(start)
        while queue:
            cell = self.cells[queue.popleft()]
            for other_id in cell.neighbors:
                if other_id is None:
                    continue
                other = self.cells[other_id]
                if other.dist > cell.dist + 1:
                    other.dist = cell.dist + 1
                    queue.append(other_id)

    def resolve(self, cell: Cell, face: int) -> Cell:
        """The neighbor of ``cell`` across ``face``, generated if needed.

        Raises:
            PrecisionAmbiguity: If the isometry lookup is ambiguous.
            CapExceeded: If the new cell lies beyond ``depth_cap``.
        """
        linked = cell.neighbors[face]
        if linked is not None:
            return self.cells[linked]
        t2, f2 = self.schema.neighbor(cell.type, face)
        isometry = cell.isometry @ self.schema.gluing(cell.type, face)
        other = self.lookup(t2, isometry)
        if other is None:
            if cell.dist + 1 > self.depth_cap:
                raise CapExceeded("cell depth", self.depth_cap)
            other = self._add(t2, isometry, cell.dist + 1)
        self._link(cell, face, other, f2)
        return other

    def link_existing(self, cell: Cell) -> None:
        """Link every open face of ``cell`` whose neighbor is already stored."""
        for face, linked in enumerate(cell.neighbors):
            if linked is not None:
                continue
            t2, f2 = self.schema.neighbor(cell.type, face)
            other = self.lookup(t2, cell.isometry @ self.schema.gluing(cell.type, face))
            if other is not None:
                self._link(cell, face, other, f2)

    def walk(self, cell: Cell, faces: Iterable[int]) -> Cell:
        for face in faces:
            cell = self.resolve(cell, face)
        return cell

    def ensure_ball(self, center: Cell, radius: int) -> None:
        """Generate and link every cell within graph distance ``radius`` of ``center``."""
        if radius < 0:
            raise ValueError("radius must be non-negative")
        seen = {center.id}
        frontier = [center]
        for _ in range(radius):
            nxt = []
            for cell in frontier:
                for face in range(len(cell.neighbors)):
                    other = self.resolve(cell, face)
                    if other.id not in seen:
                        seen.add(other.id)
                        nxt.append(other)
            frontier = nxt
        for cell in frontier:
            self.link_existing(cell)
        logger.debug("ball of radius %d around cell %d: %d cells generated", radius, center.id, len(self.cells))

    # --- export ----------------------------------------------------------------

    def to_networkx(self) -> nx.Graph:
        """The explored adjacency graph; nodes carry ``type`` and ``dist``."""
        graph = nx.Graph()
        for cell in self.cells:
            graph.add_node(cell.id, type=cell.type, dist=cell.dist)
        for cell in self.cells:
            for face, other in enumerate(cell.neighbors):
                if other is not None:
                    graph.add_edge(cell.id, other, face=face)
        return graph

    def bfs_distances(self, source: Optional[Cell] = None) -> Dict[int, int]:
        """Exact distances in the explored graph, computed independently of ``dist``."""
        start = (source or self.root).id
        return dict(nx.single_source_shortest_path_length(self.to_networkx(), start))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cells": [{"id": c.id, "type": c.type, "dist": c.dist} for c in self.cells],
            "edges": [
                [c.id, face, other]
                for c in self.cells
                for face, other in enumerate(c.neighbors)
                if other is not None
            ],
        }

    def dump(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
        return path


def coordination_by_bfs(
    schema: HoneycombSchema, root_type: int, k: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> List[int]:
    """Shell sizes ``c_0 .. c_k`` around a root of ``root_type`` by exhaustive generation."""
    graph = HoneycombGraph(schema, root_type, tolerances, depth_cap=max(k + 1, 30))
    graph.ensure_ball(graph.root, k)
    counts = [0] * (k + 1)
    for distance in graph.bfs_distances().values():
        if distance <= k:
            counts[distance] += 1
    return counts
