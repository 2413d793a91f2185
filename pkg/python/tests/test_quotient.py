"""
Tests for the finite-field manifold search.
"""

import pytest

from honeycomb.algebra import FieldMatrix, galois_field
from honeycomb.config import SearchConfig
from honeycomb.errors import NoRoots
from honeycomb.geometry import SchlafliSymbol
from honeycomb.quotient import (
    Quotient,
    _closure,
    check_local_structure,
    find_good_triples,
    find_manifolds,
    find_quotients,
    isomorphism_hash,
    orthogonal_group,
    require_roots,
    special_orthogonal_group,
    stabilizer_conjugates,
)
from honeycomb.schema import validate


def _with_cells(reports, cells):
    matching = [r for r in reports if r.cells == cells]
    assert matching, f"no {cells}-cell manifold among {[r.cells for r in reports]}"
    return matching[0]


class TestFieldRequirements:
    """Tests for the trace requirements of the symbol."""

    def test_golden_root_needed_for_pentagons(self):
        """Test that order-5 rotations need a root of x^2 - x - 1."""
        with pytest.raises(NoRoots):
            require_roots(SchlafliSymbol(5, 3, 5), galois_field(3))
        require_roots(SchlafliSymbol(5, 3, 5), galois_field(5))
        require_roots(SchlafliSymbol(5, 3, 5), galois_field(3, 2))

    def test_no_requirement_without_five(self):
        """Test that symbols without a 5 work over any field."""
        require_roots(SchlafliSymbol(3, 3, 6), galois_field(3))
        require_roots(SchlafliSymbol(4, 3, 6), galois_field(2, 2))

    def test_search_raises_no_roots(self):
        """Test that the manifold search reports the missing root."""
        with pytest.raises(NoRoots):
            find_manifolds(SchlafliSymbol(5, 3, 5), 7)


class TestRotationGroup:
    """Tests for O(3) and SO(3) over small fields."""

    @pytest.mark.parametrize("prime", [3, 5, 7])
    def test_order(self, prime):
        """Test that |SO(3, F_q)| = q(q^2 - 1)."""
        group = special_orthogonal_group(galois_field(prime))
        assert len(group) == prime * (prime * prime - 1)
        assert len({M.entries for M in group}) == len(group)

    def test_members_are_orthogonal(self):
        """Test that every member satisfies M^T M = 1 with determinant 1."""
        F = galois_field(5)
        identity = FieldMatrix.identity(F, 3)
        for M in special_orthogonal_group(F)[:40]:
            assert M.transpose() @ M == identity
            assert M.determinant().code == 1

    @pytest.mark.parametrize("prime", [3, 5])
    def test_full_group_doubles(self, prime):
        """Test that |O(3, F_q)| = 2q(q^2 - 1) in odd characteristic, with determinants +1 and -1."""
        F = galois_field(prime)
        group = orthogonal_group(F)
        assert len(group) == 2 * prime * (prime * prime - 1)
        assert len({M.entries for M in group}) == len(group)
        determinants = {M.determinant().code for M in group}
        assert determinants == {1, F.neg(1)}

    def test_characteristic_two(self):
        """Test that over F_4 the full group is the rotation group."""
        F = galois_field(2, 2)
        assert {M.entries for M in orthogonal_group(F)} == {M.entries for M in special_orthogonal_group(F)}


class TestManifoldSearch:
    """Tests reproducing known manifold rows."""

    def test_336_over_f3(self, reports_336):
        """Test the ten-cell manifold of {3,3,6} and its quotients with 5 and 1 cells."""
        report = _with_cells(reports_336, 10)
        assert len(report.manifold.group) == 120
        assert {5, 1} <= set(report.quotient_counts())
        assert {5, 1} <= set(report.quotient_schemas)

    def test_triple_orders(self, reports_336):
        """Test that the finite triple has the orders of the real generators."""
        triple = _with_cells(reports_336, 10).manifold.triple
        assert triple.orders() == (2, 2, 6, 3, 3)
        assert len(triple.cell_group) == 12

    def test_schemas_validate(self, reports_336):
        """Test that the manifold and its quotients glue into valid schemas."""
        report = _with_cells(reports_336, 10)
        assert validate(report.schema).ok
        assert report.schema.type_count == 10
        check_local_structure(report.schema)
        for cells, schema in report.quotient_schemas.items():
            assert schema.type_count == cells
            assert validate(schema).ok

    def test_report_fields(self, reports_336):
        """Test the report dictionary."""
        data = _with_cells(reports_336, 10).to_dict()
        assert data["symbol"] == [3, 3, 6]
        assert data["prime"] == 3
        assert data["cells"] == 10
        assert data["coset_formula"] in ("right", "mirrored")
        assert set(data["triple"]) == {"P", "X", "R"}
        assert data["group_order"] == 120
        assert data["cell_group_order"] == 12

    def test_isomorphic_manifolds_reported_once(self, reports_336):
        """Test that reported manifolds have pairwise distinct isomorphism hashes."""
        hashes = [r.isomorphism_hash for r in reports_336]
        assert len(hashes) == len(set(hashes))
        assert all(isomorphism_hash(r.schema) == r.isomorphism_hash for r in reports_336)

    def test_344_over_f3(self):
        """Test the five-cell manifold of {3,4,4}, whose half-turns are reflections over F_3, and its one-cell quotient."""
        report = _with_cells(find_manifolds(SchlafliSymbol(3, 4, 4), 3, config=SearchConfig(limit=8)), 5)
        assert len(report.manifold.group) == 120
        assert report.manifold.triple.X.determinant().code == galois_field(3).neg(1)
        assert 1 in report.quotient_counts()
        one_cell = report.quotient_schemas[1]
        assert validate(one_cell).ok
        check_local_structure(one_cell)

    def test_535_over_f5(self):
        """Test that {5,3,5} over F_5 gives a one-cell manifold."""
        reports = find_manifolds(SchlafliSymbol(5, 3, 5), 5)
        assert any(r.cells == 1 for r in reports)

    def test_limit(self):
        """Test that the search stops after the requested number of manifolds."""
        triples = find_good_triples(SchlafliSymbol(3, 3, 6), 3, limit=1)
        assert len(triples) == 1

    def test_446_over_f4_has_no_block_triple(self):
        """Test that F_4 admits no block-embedded triple for {4,3,6}."""
        assert find_manifolds(SchlafliSymbol(4, 3, 6), 2, degree=2, config=SearchConfig(limit=1)) == []

    @pytest.mark.slow
    def test_353_over_f11(self):
        """Test the eleven-cell manifold of {3,5,3}."""
        report = _with_cells(find_manifolds(SchlafliSymbol(3, 5, 3), 11), 11)
        assert 1 in report.quotient_counts()

    @pytest.mark.slow
    def test_436_over_f9(self):
        """Test the eight-cell manifold of {4,3,6} over F_9."""
        report = _with_cells(find_manifolds(SchlafliSymbol(4, 3, 6), 3, degree=2), 8)
        assert 1 in report.quotient_counts()


class TestFreeAction:
    """Tests that deck groups act freely on cells, faces and edges."""

    def test_generators_fix_a_face_or_an_edge(self, reports_336):
        """Test that P' fixes a face, X' fixes an edge, and the identity is never listed."""
        m = _with_cells(reports_336, 10).manifold
        bad = stabilizer_conjugates(m)
        assert m.triple.P.entries in bad
        assert m.triple.X.entries in bad
        assert FieldMatrix.identity(m.triple.field, 4).entries not in bad

    def test_quotient_members_act_freely(self, reports_336):
        """Test that every non-identity deck element moves every cell and fixes no face or edge."""
        m = _with_cells(reports_336, 10).manifold
        bad = stabilizer_conjugates(m)
        report = _with_cells(reports_336, 10)
        for quotient in report.quotients:
            assert len(quotient.members) == quotient.order
            for perm, k in quotient.members.items():
                assert m.permutation(k) == perm
                if k.is_identity():
                    continue
                assert all(perm[i] != i for i in range(m.cells))
                assert k.entries not in bad

    def test_closure_rejects_face_stabilizer(self, reports_336):
        """Test that a subgroup containing the face flip P' is refused."""
        m = _with_cells(reports_336, 10).manifold
        P = m.triple.P
        assert _closure([(P, m.permutation(P))], m.cells, stabilizer_conjugates(m)) is None

    def test_closure_rejects_unfaithful_action(self, reports_336):
        """Test that two distinct elements inducing the same permutation are refused."""
        m = _with_cells(reports_336, 10).manifold
        report = _with_cells(reports_336, 10)
        k = next(q for q in report.quotients if q.order > 1).generators[0]
        perm = m.permutation(k)
        assert _closure([(k, perm)], m.cells) is not None
        assert _closure([(k, perm), (m.triple.P, perm)], m.cells) is None

    def test_rejected_subgroups_do_not_end_the_search(self, reports_336):
        """Test that refusing every subgroup leaves only the trivial one, after offering each cell count."""
        m = _with_cells(reports_336, 10).manifold
        offered = []

        def refuse(quotient: Quotient) -> bool:
            offered.append(quotient.cells)
            return False

        found = find_quotients(m, accept=refuse)
        assert [q.order for q in found] == [1]
        assert {5, 1} <= set(offered)

    def test_one_cell_quotient_glues(self, reports_336):
        """Test that the one-cell quotient schema validates with r distinct cells around each edge."""
        schema = _with_cells(reports_336, 10).quotient_schemas[1]
        assert schema.type_count == 1
        assert validate(schema).ok
        check_local_structure(schema)
