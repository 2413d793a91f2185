"""
Tests for Schlafli symbols, the real generator triple and the cell combinatorics.
"""

import numpy as np
import pytest

from honeycomb.algebra import element_order, is_minkowski_isometry, mat_eq_within
from honeycomb.errors import DegenerateForm
from honeycomb.geometry import (
    EUCLIDEAN,
    HYPERBOLIC,
    SchlafliSymbol,
    combinatorics_for,
    generator_triple,
    gram_matrix,
    is_rigid_motion,
    mirrors_from_gram,
)

HYPERBOLIC_SYMBOLS = ["3,3,6", "3,4,4", "4,3,5", "4,3,6", "5,3,4", "5,3,5", "3,5,3", "3,4,5"]
CELL_GROUP_ORDERS = {(3, 3): 12, (3, 4): 24, (4, 3): 24, (3, 5): 60, (5, 3): 60}


class TestSchlafliSymbol:
    """Tests for parsing and classifying honeycomb symbols."""

    @pytest.mark.parametrize("text", ["4,3,5", "{4,3,5}", "435", " {4,3,5} "])
    def test_parse_forms(self, text):
        """Test that the accepted spellings all parse to the same symbol."""
        assert SchlafliSymbol.parse(text) == SchlafliSymbol(4, 3, 5)

    @pytest.mark.parametrize("text", ["3,3,3", "6,3,3", "4,3", "a,b,c", "2,3,4"])
    def test_parse_rejects(self, text):
        """Test that spherical, non-Platonic and malformed symbols are rejected."""
        with pytest.raises(ValueError):
            SchlafliSymbol.parse(text)

    def test_kinds(self):
        """Test that the cubic honeycomb is Euclidean and the others are hyperbolic."""
        assert SchlafliSymbol(4, 3, 4).kind == EUCLIDEAN
        for text in HYPERBOLIC_SYMBOLS:
            assert SchlafliSymbol.parse(text).kind == HYPERBOLIC

    def test_counts(self):
        """Test face and edge counts of the cells."""
        assert SchlafliSymbol(5, 3, 5).face_count == 12
        assert SchlafliSymbol(5, 3, 5).edge_count == 30
        assert SchlafliSymbol(3, 4, 4).face_count == 8
        assert str(SchlafliSymbol(3, 3, 6)) == "{3,3,6}"


class TestMirrors:
    """Tests for the Gram matrix and the mirror normals."""

    def test_gram_matrix(self):
        """Test the off-diagonal entries -cos(pi/m)."""
        G = gram_matrix(SchlafliSymbol(4, 3, 5))
        assert G[0, 1] == pytest.approx(-np.cos(np.pi / 4))
        assert G[2, 3] == pytest.approx(-np.cos(np.pi / 5))
        assert G[0, 2] == 0.0

    def test_normals_reproduce_gram(self):
        """Test that the computed normals have the requested inner products."""
        G = gram_matrix(SchlafliSymbol(5, 3, 5))
        mirrors = mirrors_from_gram(G)
        assert np.allclose(mirrors.inner_products(), G, atol=1e-9)
        for reflection in mirrors.reflections():
            assert mat_eq_within(reflection @ reflection, np.eye(4), 1e-9)

    def test_euclidean_form_is_degenerate(self):
        """Test that the Euclidean Gram matrix has no hyperbolic realization."""
        with pytest.raises(DegenerateForm):
            mirrors_from_gram(gram_matrix(SchlafliSymbol(4, 3, 4)))


class TestGeneratorTriple:
    """Tests for the generators P, X, R."""

    @pytest.mark.parametrize("text", HYPERBOLIC_SYMBOLS + ["4,3,4"])
    def test_orders_and_relation(self, text):
        """Test involutions, rotation orders and the recorded relation."""
        sym = SchlafliSymbol.parse(text)
        triple = generator_triple(sym)
        P, X, R = triple.generators
        eye = np.eye(4)
        assert mat_eq_within(P @ P, eye, 1e-7)
        assert mat_eq_within(X @ X, eye, 1e-7)
        assert element_order(R, 2 * sym.q) == sym.q
        assert element_order(triple.edge_rotation(), 2 * sym.r) == sym.r
        assert element_order(triple.face_rotation(), 2 * sym.p) == sym.p
        if triple.relation == "PX=RXPR":
            assert mat_eq_within(P @ X, R @ X @ P @ R, 1e-7)
        else:
            assert mat_eq_within(X @ P, R @ P @ X @ R, 1e-7)

    def test_hyperbolic_generators_are_isometries(self):
        """Test that hyperbolic generators preserve the Minkowski form."""
        triple = generator_triple(SchlafliSymbol(4, 3, 5))
        assert all(is_minkowski_isometry(M) for M in triple.generators)

    def test_euclidean_generators_are_rigid(self):
        """Test that the cubic generators are affine rigid motions."""
        triple = generator_triple(SchlafliSymbol(4, 3, 4))
        assert all(is_rigid_motion(M) for M in triple.generators)

    def test_p_moves_the_cell(self):
        """Test that P fixes the face center and moves the cell center."""
        triple = generator_triple(SchlafliSymbol(5, 3, 5))
        assert np.allclose(triple.P @ triple.face_center, triple.face_center, atol=1e-7)
        assert not np.allclose(triple.P @ triple.cell_center, triple.cell_center, atol=1e-3)


class TestCellCombinatorics:
    """Tests for faces, edges and edge cycles of the standard cell."""

    @pytest.mark.parametrize("text", HYPERBOLIC_SYMBOLS + ["4,3,4"])
    def test_faces_edges_group(self, text):
        """Test that the orbits give the Platonic face and edge counts."""
        sym = SchlafliSymbol.parse(text)
        cell = combinatorics_for(sym)
        assert len(cell.face_centers) == sym.face_count
        assert len(cell.edges) == sym.edge_count
        assert len(cell.group) == CELL_GROUP_ORDERS[(sym.p, sym.q)]

    def test_every_face_has_p_edges(self):
        """Test that each face of the dodecahedron borders five edges."""
        cell = combinatorics_for(SchlafliSymbol(5, 3, 5))
        counts = [0] * len(cell.face_centers)
        for a, b in cell.edges:
            counts[a] += 1
            counts[b] += 1
        assert counts == [5] * 12

    def test_cycles_have_r_steps(self):
        """Test that walking around every edge takes r steps."""
        sym = SchlafliSymbol(4, 3, 5)
        cell = combinatorics_for(sym)
        assert len(cell.cycles) == sym.edge_count
        assert all(len(cycle) == sym.r for cycle in cell.cycles)

    @pytest.mark.parametrize("text", HYPERBOLIC_SYMBOLS + ["4,3,4"])
    def test_every_edge_cycle_closes(self, text):
        """Test that every edge walk comes back to the cell after r steps with a rotation of the cell."""
        sym = SchlafliSymbol.parse(text)
        cell = combinatorics_for(sym)
        assert len(cell.cycles) == sym.edge_count
        for index, cycle in enumerate(cell.cycles):
            assert len(cycle) == sym.r
            assert cycle.faces[0] == cell.edges[index][0]
            assert np.allclose(cycle.product @ cell.triple.cell_center, cell.triple.cell_center, atol=1e-6)

    def test_face_zero_is_designated(self):
        """Test that the designated face center is found as face 0."""
        cell = combinatorics_for(SchlafliSymbol(3, 4, 4))
        assert cell.locate_face(cell.triple.face_center) == 0
