"""
Tests for honeycomb schemas: validation, built-ins and the file format.
"""

import json
import re

import numpy as np
import pytest

from honeycomb.errors import ParseError
from honeycomb.hashing import digest, fnv1a64
from honeycomb.schema import (
    BUILTIN_SCHEMAS,
    HoneycombSchema,
    parse_schema,
    read_schema,
    serialize_schema,
    validate,
    write_schema,
)


class TestBuiltinSchemas:
    """Tests for the shipped one-cell manifolds."""

    def test_torus_validates(self, torus_schema):
        """Test that the cubic 3-torus passes every check."""
        report = validate(torus_schema)
        assert report.ok, str(report)
        assert torus_schema.type_count == 1
        assert torus_schema.face_counts == (6,)

    def test_torus_pairs_opposite_faces(self, torus_schema):
        """Test that every cube face is glued to the opposite one by a translation."""
        cell = torus_schema.combinatorics
        for f in torus_schema.faces(0):
            t2, f2 = torus_schema.neighbor(0, f)
            assert t2 == 0 and f2 != f
            assert np.allclose(cell.face_centers[f][:3], -cell.face_centers[f2][:3])
            M = torus_schema.gluing(0, f)
            assert np.allclose(M @ torus_schema.gluing(0, f2), np.eye(4))

    def test_seifert_weber_validates(self, seifert_weber_schema):
        """Test that the Seifert-Weber gluing validates with 12 faces."""
        report = validate(seifert_weber_schema)
        assert report.ok, str(report)
        assert seifert_weber_schema.face_counts == (12,)
        assert seifert_weber_schema.geometry == "hyperbolic"

    def test_registry(self):
        """Test that the built-in names map to factories."""
        assert sorted(BUILTIN_SCHEMAS) == ["seifert-weber-535", "torus-434"]

    def test_edge_cycles(self, torus_schema, seifert_weber_schema):
        """Test that walking around every edge takes r cells and closes."""
        for schema in (torus_schema, seifert_weber_schema):
            r = schema.symbol.r
            cycles = schema.edge_cycles[0]
            assert len(cycles) == schema.symbol.edge_count
            for cycle in cycles:
                assert len(cycle.faces) == r
                assert np.allclose(cycle.product, np.eye(4), atol=1e-6)


class TestValidation:
    """Tests for the violations a broken schema reports."""

    def test_broken_pairing(self, torus_schema):
        """Test that redirecting one face breaks the pairing involution."""
        broken = torus_schema.with_pairing(0, 0, 0, 0)
        report = validate(broken)
        assert not report.ok
        assert "involution" in report.kinds()

    def test_broken_matrix(self, torus_schema):
        """Test that replacing a gluing by the identity is reported."""
        broken = torus_schema.with_matrix(0, 0, np.eye(4))
        report = validate(broken)
        assert not report.ok
        assert "inverse" in report.kinds()
        assert "face-match" in report.kinds()

    def test_non_isometry(self, seifert_weber_schema):
        """Test that a scaled gluing is not accepted as an isometry."""
        broken = seifert_weber_schema.with_matrix(0, 3, 2.0 * seifert_weber_schema.gluing(0, 3))
        assert "isometry" in validate(broken).kinds()

    def test_wrong_face_count(self, torus_schema):
        """Test that a type with the wrong number of faces is reported."""
        broken = HoneycombSchema(torus_schema.symbol, torus_schema.geometry, (5,), {}, {})
        report = validate(broken)
        assert report.kinds() == ["faces"]

    def test_wrong_geometry(self, torus_schema):
        """Test that a Euclidean symbol declared hyperbolic is reported."""
        broken = HoneycombSchema(
            torus_schema.symbol, "hyperbolic", torus_schema.face_counts, torus_schema.pairing, torus_schema.matrices
        )
        assert "geometry" in validate(broken).kinds()

    def test_report_serializes(self, torus_schema):
        """Test that a report converts to plain data."""
        data = validate(torus_schema.with_pairing(0, 0, 0, 0)).to_dict()
        assert data["ok"] is False
        assert all({"kind", "location", "detail"} <= set(v) for v in data["violations"])


class TestSchemaFile:
    """Tests for the canonical schema file format."""

    def test_round_trip(self, tmp_path, seifert_weber_schema):
        """Test that writing and reading preserves the canonical text and hash."""
        path = write_schema(seifert_weber_schema, tmp_path / "sw.schema.json")
        again = read_schema(path)
        assert serialize_schema(again) == serialize_schema(seifert_weber_schema)
        assert again.canonical_hash == seifert_weber_schema.canonical_hash
        assert validate(again).ok

    def test_canonical_text(self, torus_schema):
        """Test sorted keys and the hash format."""
        data = json.loads(serialize_schema(torus_schema))
        assert list(data) == sorted(data)
        assert data["symbol"] == [4, 3, 4]
        assert data["pairings"] == sorted(data["pairings"])
        assert re.fullmatch(r"[0-9A-F]{16}", torus_schema.canonical_hash)

    def test_hash_distinguishes_gluings(self, torus_schema):
        """Test that changing a matrix changes the canonical hash."""
        other = torus_schema.with_matrix(0, 0, np.eye(4))
        assert other.canonical_hash != torus_schema.canonical_hash

    def test_invalid_json_reports_position(self):
        """Test that malformed JSON raises ParseError with a line number."""
        with pytest.raises(ParseError) as info:
            parse_schema('{\n  "symbol": [4, 3, 4],\n  oops\n}')
        assert info.value.line == 3

    @pytest.mark.parametrize(
        "change",
        [
            {"symbol": [4, 3]},
            {"symbol": [3, 3, 3]},
            {"geometry": "spherical"},
            {"types": []},
            {"pairings": [[0, 0, 0, 9]]},
            {"matrices": [[0, 0, [1, 0, 0]]]},
        ],
    )
    def test_bad_fields(self, torus_schema, change):
        """Test that fields of the wrong shape are rejected."""
        data = json.loads(serialize_schema(torus_schema))
        data.update(change)
        with pytest.raises(ParseError):
            parse_schema(json.dumps(data))

    def test_missing_field(self, torus_schema):
        """Test that a missing top-level field is rejected."""
        data = json.loads(serialize_schema(torus_schema))
        del data["matrices"]
        with pytest.raises(ParseError):
            parse_schema(json.dumps(data))

    def test_double_pairing(self, torus_schema):
        """Test that a face paired twice is a parse error."""
        data = json.loads(serialize_schema(torus_schema))
        partner = torus_schema.neighbor(0, 0)[1]
        other = next(f for f in torus_schema.faces(0) if f not in (0, partner))
        data["pairings"].append([0, 0, 0, other])
        with pytest.raises(ParseError):
            parse_schema(json.dumps(data))

    def test_digest_vectors(self):
        """Test the FNV-1a digest against published vectors."""
        assert fnv1a64(b"") == 0xCBF29CE484222325
        assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
        assert digest("a") == "AF63DC4C8601EC8C"
