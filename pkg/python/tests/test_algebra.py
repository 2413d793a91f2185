"""
Tests for finite-field and real matrix arithmetic.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honeycomb.algebra import (
    FieldMatrix,
    GaloisField,
    element_order,
    evaluate_word,
    field_ops,
    galois_field,
    generate_group,
    is_minkowski_isometry,
    mat_eq_within,
    mat_inv,
    mat_mul,
    mat_ops,
    matrix_key,
    preserves_form,
    real_key,
)
from honeycomb.errors import CapExceeded, DivisionByZero, FieldMismatch, Singular


def boost(t: float) -> np.ndarray:
    M = np.eye(4)
    M[0, 0] = M[3, 3] = math.cosh(t)
    M[0, 3] = M[3, 0] = math.sinh(t)
    return M


def rotation_z(quarter_turns: int = 1) -> np.ndarray:
    angle = quarter_turns * math.pi / 2
    M = np.eye(4)
    M[0, 0] = M[1, 1] = math.cos(angle)
    M[0, 1] = -math.sin(angle)
    M[1, 0] = math.sin(angle)
    return M


class TestGaloisField:
    """Tests for prime fields and their quadratic extensions."""

    def test_prime_field_inverse(self):
        """Test that every nonzero element of F_5 has its inverse."""
        F = galois_field(5)
        assert F.inv(2) == 3
        for x in range(1, 5):
            assert F.mul(x, F.inv(x)) == 1

    def test_zero_has_no_inverse(self):
        """Test that inverting zero raises DivisionByZero, which is also a ZeroDivisionError."""
        F = galois_field(7)
        with pytest.raises(DivisionByZero):
            F.inv(0)
        with pytest.raises(ZeroDivisionError):
            F.element(0).inverse()

    def test_extension_of_odd_prime(self):
        """Test that F_9 is built with w^2 equal to a non-residue."""
        F = galois_field(3, 2)
        assert F.size == 9
        w = F.encode(0, 1)
        assert F.mul(w, w) == F.encode(2)

    def test_extension_of_two(self):
        """Test that F_4 uses w^2 = w + 1."""
        F = galois_field(2, 2)
        w = F.encode(0, 1)
        assert F.mul(w, w) == F.encode(1, 1)

    def test_rejects_composites_and_degrees(self):
        """Test that non-prime characteristics and cubic extensions are refused."""
        with pytest.raises(ValueError):
            GaloisField(4)
        with pytest.raises(ValueError):
            GaloisField(3, 3)

    def test_fields_are_shared(self):
        """Test that galois_field returns one instance per descriptor."""
        assert galois_field(11) is galois_field(11)
        assert galois_field(3, 2) == GaloisField(3, 2)

    def test_roots_of_golden_polynomial(self):
        """Test that x^2 - x - 1 splits over F_5 and F_11 but not over F_3."""
        assert len(galois_field(11).roots((1, -1, -1))) == 2
        assert galois_field(5).roots((1, -1, -1)) == [3]
        assert galois_field(3).roots((1, -1, -1)) == []

    def test_mixing_fields_fails(self):
        """Test that elements of different fields do not combine."""
        with pytest.raises(FieldMismatch):
            galois_field(5).element(1) + galois_field(7).element(1)

    @settings(max_examples=200)
    @given(
        st.sampled_from([(2, 1), (7, 1), (2, 2), (3, 2), (5, 2)]),
        st.integers(min_value=0),
        st.integers(min_value=0),
        st.integers(min_value=0),
    )
    def test_field_axioms(self, descriptor, x, y, z):
        """Test distributivity, commutativity and inverses on random elements."""
        F = galois_field(*descriptor)
        x, y, z = x % F.size, y % F.size, z % F.size
        assert F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
        assert F.mul(x, y) == F.mul(y, x)
        assert F.add(x, F.neg(x)) == 0
        assert F.sub(F.add(x, y), y) == x
        if x:
            assert F.mul(x, F.inv(x)) == 1


class TestFieldMatrix:
    """Tests for matrices over finite fields."""

    def test_inverse_round_trip(self):
        """Test that a matrix times its inverse is the identity."""
        F = galois_field(7)
        M = FieldMatrix.from_rows(F, [[1, 2, 0], [0, 1, 3], [4, 0, 1]])
        assert (M @ M.inverse()).is_identity()

    def test_singular_matrix(self):
        """Test that a rank-deficient matrix cannot be inverted and has determinant zero."""
        F = galois_field(5)
        M = FieldMatrix.from_rows(F, [[1, 2], [2, 4]])
        assert M.determinant().is_zero()
        with pytest.raises(Singular):
            M.inverse()

    def test_block_embedding(self):
        """Test that a 3x3 block embeds with the last basis vector fixed."""
        F = galois_field(3)
        inner = FieldMatrix.from_rows(F, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
        M = FieldMatrix.block(inner)
        assert M.size == 4
        assert M[3, 3].code == 1
        assert M.upper_block() == inner

    def test_orthogonal_block_is_isometry(self):
        """Test that block-embedded orthogonal matrices satisfy the Minkowski isometry test."""
        F = galois_field(5)
        inner = FieldMatrix.from_rows(F, [[0, -1, 0], [1, 0, 0], [0, 0, 1]])
        M = FieldMatrix.block(inner)
        assert is_minkowski_isometry(M)
        assert element_order(M, 10) == 4

    def test_permutation_group_order(self):
        """Test that two permutation matrices generate the symmetric group of order 6."""
        F = galois_field(3)
        swap = FieldMatrix.from_rows(F, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
        cycle = FieldMatrix.from_rows(F, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
        group = generate_group([swap, cycle])
        assert len(group) == 6
        assert group.word_of(FieldMatrix.identity(F, 3)) == ()
        assert evaluate_word([swap, cycle], group.word_of(cycle @ swap)) == cycle @ swap

    def test_group_cap(self):
        """Test that enumeration stops with CapExceeded beyond its cap."""
        F = galois_field(3)
        swap = FieldMatrix.from_rows(F, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
        cycle = FieldMatrix.from_rows(F, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
        with pytest.raises(CapExceeded):
            generate_group([swap, cycle], cap=3)

    def test_matrix_key_is_entries(self):
        """Test that finite-field matrices are keyed by their exact entries."""
        F = galois_field(5)
        M = FieldMatrix.identity(F)
        assert matrix_key(M) == M.entries


class TestRealMatrices:
    """Tests for real 4x4 isometries."""

    def test_boost_is_isometry(self):
        """Test that a hyperbolic boost preserves the Minkowski form."""
        M = boost(1.3)
        assert is_minkowski_isometry(M)
        assert preserves_form(M)
        assert not preserves_form(np.diag([2.0, 1.0, 1.0, 1.0]))

    def test_rotation_group(self):
        """Test that a quarter turn generates a cyclic group of order 4."""
        group = generate_group([rotation_z()])
        assert len(group) == 4
        assert element_order(rotation_z(), 8) == 4
        assert element_order(boost(0.5), 8) is None

    def test_singular_real_matrix(self):
        """Test that inverting a singular real matrix raises Singular."""
        with pytest.raises(Singular):
            mat_inv(np.zeros((4, 4)))

    def test_real_and_field_do_not_mix(self):
        """Test that mat_mul refuses a real and a finite-field operand."""
        with pytest.raises(FieldMismatch):
            mat_mul(np.eye(4), FieldMatrix.identity(galois_field(3)))

    def test_real_key_tolerates_noise(self):
        """Test that isometries equal up to rounding noise share a key."""
        M = boost(0.7) @ rotation_z()
        assert real_key(M) == real_key(M + 1e-12)
        assert real_key(M) != real_key(M + 1e-3)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=-3, max_value=3), st.integers(min_value=0, max_value=3))
    def test_products_stay_isometries(self, t, turns):
        """Test that products and inverses of isometries are isometries."""
        M = boost(t) @ rotation_z(turns)
        assert is_minkowski_isometry(M, eps=1e-8)
        assert mat_eq_within(M @ mat_inv(M), np.eye(4), 1e-8)


class TestDispatch:
    """Tests for the operation dispatchers."""

    def test_field_ops(self):
        """Test each field operation by name."""
        F = galois_field(7)
        x, y = F.element(3), F.element(5)
        assert field_ops(x, y, "add").code == 1
        assert field_ops(x, y, "sub").code == 5
        assert field_ops(x, y, "mul").code == 1
        assert field_ops(x, None, "inv").code == 5
        assert field_ops(x, F.element(3), "eq") is True
        with pytest.raises(ValueError):
            field_ops(x, None, "mul")
        with pytest.raises(ValueError):
            field_ops(x, y, "pow")

    def test_mat_ops(self):
        """Test each matrix operation by name on a real isometry."""
        M = boost(0.4) @ rotation_z()
        assert mat_ops(M, mat_ops(M, None, "inv"), "eq_within") is False
        assert mat_ops(mat_ops(M, mat_ops(M, None, "inv"), "mul"), np.eye(4), "eq_within") is True
        assert np.allclose(mat_ops(M, None, "transpose"), M.T)
        with pytest.raises(ValueError):
            mat_ops(M, None, "mul")
