"""
Tests for the command-line front end.
"""

import json

import numpy as np
import pytest

from honeycomb.cli import EXIT_CAP, EXIT_NOT_FOUND, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main
from honeycomb.rts import PARENT, ChildRule, Rts, SideRule, State, read_rts, serialize_rts, write_rts
from honeycomb.schema import builtin_seifert_weber_535, write_schema


class TestBuiltinAndLearn:
    """Tests for writing built-in schemas and learning from them."""

    def test_pipeline(self, tmp_path, capsys):
        """Test builtin, learn, verify and coordseq end to end."""
        schema = tmp_path / "torus.schema.json"
        grts = tmp_path / "torus.grts.json"
        assert main(["builtin", "torus-434", "--out", str(schema)]) == EXIT_OK
        assert main(["learn", "--schema", str(schema), "--out", str(grts)]) == EXIT_OK
        assert read_rts(grts).states
        assert main(["verify", "--grts", str(grts), "--schema", str(schema)]) == EXIT_OK
        capsys.readouterr()
        assert main(["coordseq", "--grts", str(grts), "--n", "4"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "1, 6, 18, 38, 66"

    def test_learn_reports_json(self, tmp_path, capsys, torus_files):
        """Test the machine-readable learn summary."""
        schema_path, _ = torus_files
        out = tmp_path / "again.grts.json"
        assert main(["--json", "learn", "--schema", str(schema_path), "--out", str(out)]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["states"] > 0
        assert data["out"] == str(out)

    def test_invalid_schema(self, tmp_path, capsys, torus_schema):
        """Test that learning from a schema that does not validate is a usage error."""
        path = write_schema(torus_schema.with_matrix(0, 0, np.eye(4)), tmp_path / "broken.schema.json")
        assert main(["learn", "--schema", str(path), "--out", str(tmp_path / "x.json")]) == EXIT_USAGE
        assert "inverse" in capsys.readouterr().err

    def test_iteration_cap(self, tmp_path, torus_files):
        """Test that running out of iterations exits with the cap code."""
        schema_path, _ = torus_files
        args = ["learn", "--schema", str(schema_path), "--out", str(tmp_path / "x.json")]
        assert main(args + ["--max-iterations", "1", "--ball-radius", "1"]) == EXIT_CAP

    def test_bad_config_file(self, tmp_path, torus_files):
        """Test that an unknown config key is a usage error."""
        schema_path, _ = torus_files
        config = tmp_path / "learner.json"
        config.write_text('{"radius": 3}')
        args = ["learn", "--schema", str(schema_path), "--out", str(tmp_path / "x.json"), "--config", str(config)]
        assert main(args) == EXIT_USAGE


class TestVerifyCommand:
    """Tests for the verify subcommand."""

    def test_report_file(self, tmp_path, torus_files):
        """Test that the report is written as JSON."""
        schema_path, rts_path = torus_files
        report = tmp_path / "report.json"
        args = ["verify", "--grts", str(rts_path), "--schema", str(schema_path), "--report", str(report)]
        assert main(args) == EXIT_OK
        assert json.loads(report.read_text())["ok"] is True

    def test_schema_hash_mismatch(self, tmp_path, torus_files):
        """Test that a GRTS checked against another schema is refused."""
        _, rts_path = torus_files
        other = write_schema(builtin_seifert_weber_535(), tmp_path / "sw.schema.json")
        assert main(["verify", "--grts", str(rts_path), "--schema", str(other)]) == EXIT_USAGE

    def test_failure_exit_code(self, tmp_path, capsys, torus_files, torus_rts):
        """Test that a GRTS failing verification exits with 6 and lists witnesses."""
        schema_path, _ = torus_files
        broken = Rts(torus_rts.symbol, torus_rts.schema_hash, torus_rts.states, (0, 0))
        path = write_rts(broken, tmp_path / "broken.grts.json")
        assert main(["verify", "--grts", str(path), "--schema", str(schema_path)]) == EXIT_VERIFY
        assert "verification failed" in capsys.readouterr().out

    def test_malformed_file(self, tmp_path, torus_files):
        """Test that a malformed GRTS file is a usage error."""
        schema_path, _ = torus_files
        path = tmp_path / "bad.grts.json"
        path.write_text("{not json")
        assert main(["verify", "--grts", str(path), "--schema", str(schema_path)]) == EXIT_USAGE

    def test_missing_file(self, tmp_path, torus_files):
        """Test that a missing input file is a usage error."""
        schema_path, _ = torus_files
        assert main(["verify", "--grts", str(tmp_path / "none.json"), "--schema", str(schema_path)]) == EXIT_USAGE


class TestOtherCommands:
    """Tests for coordseq, export and fieldquotient."""

    def test_coordseq_json(self, capsys, torus_files):
        """Test the machine-readable coordination sequence."""
        _, rts_path = torus_files
        assert main(["--json", "coordseq", "--grts", str(rts_path), "--n", "2"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out) == {"root": 0, "terms": [1, 6, 18]}

    def test_coordseq_bad_root(self, torus_files):
        """Test that an unknown root type is a usage error."""
        _, rts_path = torus_files
        assert main(["coordseq", "--grts", str(rts_path), "--n", "2", "--root", "1"]) == EXIT_USAGE

    def test_export(self, tmp_path, torus_files):
        """Test that export writes points and tree edges."""
        schema_path, rts_path = torus_files
        out = tmp_path / "ball.json"
        args = ["export", "--grts", str(rts_path), "--schema", str(schema_path), "--radius", "1", "--out", str(out)]
        assert main(args) == EXIT_OK
        data = json.loads(out.read_text())
        assert data["model"] == "poincare_ball"
        assert len(data["points"]) == 7

    def test_fieldquotient_writes_schemas(self, tmp_path, capsys):
        """Test that found manifolds and quotients are written with a report."""
        out = tmp_path / "manifolds"
        assert main(["fieldquotient", "--symbol", "3,3,6", "--prime", "3", "--limit", "1", "--out", str(out)]) == EXIT_OK
        names = sorted(p.name for p in out.iterdir())
        assert any(name.endswith(".report.json") for name in names)
        assert "cells" in capsys.readouterr().out

    def test_fieldquotient_nothing_found(self, tmp_path):
        """Test that an empty search exits with the not-found code."""
        args = ["fieldquotient", "--symbol", "4,3,6", "--prime", "2", "--squared", "--limit", "1"]
        assert main(args + ["--out", str(tmp_path)]) == EXIT_NOT_FOUND

    def test_fieldquotient_no_roots(self, tmp_path):
        """Test that a field without the needed square root exits with the not-found code."""
        args = ["fieldquotient", "--symbol", "5,3,5", "--prime", "7", "--out", str(tmp_path)]
        assert main(args) == EXIT_NOT_FOUND

    def test_bad_symbol(self, tmp_path):
        """Test that a spherical symbol is a usage error."""
        assert main(["fieldquotient", "--symbol", "3,3,3", "--prime", "3", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_argparse_errors_exit_two(self):
        """Test that a missing subcommand exits through argparse with status 2."""
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2


def _sites(rts, kind):
    return [(q, f) for q, state in enumerate(rts.states) for f, rule in enumerate(state.rules) if isinstance(rule, kind)]


def _replace(rts, q, f, rule):
    rules = list(rts.states[q].rules)
    rules[f] = rule
    states = list(rts.states)
    states[q] = State(states[q].type, tuple(rules))
    return Rts(rts.symbol, rts.schema_hash, tuple(states), rts.roots)


def corrupt(rts, kind, ordinal):
    """One wrong rule in an otherwise verified GRTS."""
    if kind == "child":
        q, f = _sites(rts, ChildRule)[ordinal]
        return _replace(rts, q, f, ChildRule(rts.roots[0]))
    if kind in ("path", "dist"):
        q, f = _sites(rts, SideRule)[ordinal]
        rule = rts.rule(q, f)
        if kind == "path":
            last = next(g for g in range(len(rts.states[q].rules)) if g != rule.path[-1])
            return _replace(rts, q, f, SideRule(rule.path[:-1] + (last,), rule.dist))
        return _replace(rts, q, f, SideRule(rule.path, rule.dist[:-1] + (rule.dist[-1] + 1,)))
    q = [
        s
        for s, state in enumerate(rts.states)
        if state.parent_face is not None and any(isinstance(rule, SideRule) for rule in state.rules)
    ][ordinal]
    state = rts.states[q]
    side = next(f for f, rule in enumerate(state.rules) if isinstance(rule, SideRule))
    swapped = _replace(rts, q, side, PARENT)
    return _replace(swapped, q, state.parent_face, state.rules[side])


CORRUPTIONS = [
    ("child", 0),
    ("child", 1),
    ("child", 2),
    ("path", 0),
    ("path", 1),
    ("path", 2),
    ("dist", 0),
    ("dist", 1),
    ("parent", 0),
    ("parent", 1),
]


class TestFaultInjection:
    """Tests that single wrong rules in a verified GRTS are caught by verify."""

    @pytest.mark.parametrize("kind, ordinal", CORRUPTIONS)
    def test_corruption_is_caught(self, tmp_path, capsys, torus_files, torus_rts, kind, ordinal):
        """Test that verify exits with 6 and names a witness."""
        schema_path, _ = torus_files
        broken = corrupt(torus_rts, kind, ordinal)
        assert broken != torus_rts
        path = write_rts(broken, tmp_path / f"{kind}{ordinal}.grts.json")
        capsys.readouterr()
        assert main(["verify", "--grts", str(path), "--schema", str(schema_path)]) == EXIT_VERIFY
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "verification failed:"
        assert len(lines) >= 2 and lines[1].strip()

    def test_corruptions_are_distinct(self, torus_rts):
        """Test that the injected faults give ten different GRTSs."""
        assert len({serialize_rts(corrupt(torus_rts, *c)) for c in CORRUPTIONS}) == len(CORRUPTIONS)

    def test_short_rule_list(self, tmp_path, capsys, torus_files, torus_rts):
        """Test that a state with a missing rule fails verification instead of crashing."""
        schema_path, _ = torus_files
        states = list(torus_rts.states)
        victim = next(q for q, state in enumerate(states) if state.parent_face is not None)
        states[victim] = State(states[victim].type, states[victim].rules[:-1])
        path = write_rts(Rts(torus_rts.symbol, torus_rts.schema_hash, tuple(states), torus_rts.roots), tmp_path / "short.grts.json")
        assert main(["verify", "--grts", str(path), "--schema", str(schema_path)]) == EXIT_VERIFY
        assert "structure" in capsys.readouterr().out
