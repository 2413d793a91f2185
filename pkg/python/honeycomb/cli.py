"""
Command-line front end.

Each subcommand reads its inputs from files and writes its outputs to files,
so every pipeline stage can be rerun on its own::

    python -m honeycomb builtin torus-434 --out torus.schema.json
    python -m honeycomb learn --schema torus.schema.json --out torus.grts.json
    python -m honeycomb verify --grts torus.grts.json --schema torus.schema.json
    python -m honeycomb coordseq --grts torus.grts.json --n 19

Exit codes: 0 success, 2 usage or parse error, 3 nothing found, 4 a cap was
exceeded, 5 precision ambiguity, 6 verification failed.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from honeycomb import __version__
from honeycomb.config import LearnerConfig, SearchConfig
from honeycomb.errors import (
    CapExceeded,
    ConfigError,
    HoneycombError,
    IterationCapExceeded,
    NoRoots,
    ParseError,
    PrecisionAmbiguity,
    SchemaError,
)
from honeycomb.geometry import SchlafliSymbol
from honeycomb.learner import learn
from honeycomb.quotient import find_manifolds
from honeycomb.rts import MODELS, coordination_from_rts, export_geometry, read_rts, write_rts
from honeycomb.schema import BUILTIN_SCHEMAS, read_schema, validate, write_schema
from honeycomb.verifier import verify_rts

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_CAP = 4
EXIT_PRECISION = 5
EXIT_VERIFY = 6


class UsageError(HoneycombError):
    """Raised on arguments that parse but cannot be used together."""


def _emit(args: argparse.Namespace, text: str, data: Dict[str, Any]) -> None:
    if args.json:
        print(json.dumps(data, sort_keys=True))
    else:
        print(text)


def _write_json(path: Path, data: Any) -> Path:
    path.write_text(json.dumps(data, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return path


def _learner_config(args: argparse.Namespace) -> LearnerConfig:
    config = LearnerConfig.from_file(args.config) if args.config else LearnerConfig()
    overrides = {
        "max_iterations": args.max_iterations,
        "ball_radius": args.ball_radius,
        "max_ball_radius": args.max_ball_radius,
        "suffix_check_l": args.suffix_check,
        "state_cap": args.state_cap,
    }
    changes: Dict[str, Any] = {name: value for name, value in overrides.items() if value is not None}
    if args.no_subtree_reuse:
        changes["subtree_reuse"] = False
    if getattr(args, "full_dist_check", False):
        changes["full_dist_check"] = True
    return config.replace(**changes) if changes else config


def _checked_schema(path: str) -> Any:
    schema = read_schema(path)
    report = validate(schema)
    if not report.ok:
        print(str(report), file=sys.stderr)
        raise SchemaError(f"schema {path} does not validate: {', '.join(report.kinds())}")
    return schema


# --- subcommands -------------------------------------------------------------------


def cmd_fieldquotient(args: argparse.Namespace) -> int:
    symbol = SchlafliSymbol.parse(args.symbol)
    config = SearchConfig(limit=args.limit)
    degree = 2 if args.squared else 1
    reports = find_manifolds(symbol, args.prime, degree, config)
    if not reports:
        _emit(args, f"no manifold found for {symbol} over F_{args.prime ** degree}", {"manifolds": []})
        return EXIT_NOT_FOUND
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summaries = []
    lines = []
    for index, report in enumerate(reports):
        stem = f"{symbol.compact()}-p{args.prime ** degree}-{index}"
        data = report.to_dict()
        data["schema_file"] = write_schema(report.schema, out / f"{stem}.schema.json").name
        data["quotient_files"] = {
            str(cells): write_schema(schema, out / f"{stem}-q{cells}.schema.json").name
            for cells, schema in sorted(report.quotient_schemas.items())
        }
        _write_json(out / f"{stem}.report.json", data)
        summaries.append(data)
        lines.append(f"{stem}: {report.cells} cells, quotients {report.quotient_counts()}, hash {report.isomorphism_hash}")
    _emit(args, "\n".join(lines), {"manifolds": summaries})
    return EXIT_OK


def cmd_learn(args: argparse.Namespace) -> int:
    schema = _checked_schema(args.schema)
    config = _learner_config(args)
    result = learn(schema, config, threads=args.threads)
    write_rts(result.rts, args.out)
    data = {
        "states": result.states,
        "iterations": result.iterations,
        "ball_radius": result.ball_radius,
        "samples": result.samples,
        "replays": result.replays,
        "elapsed": round(result.elapsed, 3),
        "out": str(args.out),
    }
    _emit(
        args,
        f"learned {result.states} states in {result.iterations} iterations "
        f"({result.elapsed:.1f}s, radius {result.ball_radius}) -> {args.out}",
        data,
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    rts = read_rts(args.grts)
    schema = read_schema(args.schema)
    if rts.schema_hash != schema.canonical_hash:
        raise UsageError(f"{args.grts} was learned for schema {rts.schema_hash}, not {schema.canonical_hash}")
    config = LearnerConfig(full_dist_check=args.full_dist_check)
    report = verify_rts(rts, schema, config, threads=args.threads)
    if args.report:
        _write_json(Path(args.report), report.to_dict())
    if report.ok:
        sizes = sorted(report.transducers.values())
        text = f"verified: {len(sizes)} transducers, largest {sizes[-1] if sizes else 0} states, {len(report.cycles)} edge cycles"
    else:
        text = "verification failed:\n" + "\n".join(f"  {w}" for w in report.witnesses)
    _emit(args, text, report.to_dict())
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_coordseq(args: argparse.Namespace) -> int:
    rts = read_rts(args.grts)
    if not 0 <= args.root < len(rts.roots):
        raise UsageError(f"root type {args.root} is not a type of {rts!r}")
    if args.n < 0:
        raise UsageError("--n must be non-negative")
    terms = coordination_from_rts(rts, args.root, args.n)
    _emit(args, ", ".join(str(t) for t in terms), {"root": args.root, "terms": terms})
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    rts = read_rts(args.grts)
    schema = read_schema(args.schema)
    if args.radius < 0:
        raise UsageError("--radius must be non-negative")
    geometry = export_geometry(schema, rts, args.radius, args.model, args.root)
    _write_json(Path(args.out), geometry)
    _emit(
        args,
        f"exported {len(geometry['points'])} points and {len(geometry['edges'])} edges -> {args.out}",
        {"points": len(geometry["points"]), "edges": len(geometry["edges"]), "out": str(args.out)},
    )
    return EXIT_OK


def cmd_builtin(args: argparse.Namespace) -> int:
    schema = BUILTIN_SCHEMAS[args.name]()
    write_schema(schema, args.out)
    _emit(args, f"{args.name} -> {args.out} ({schema.canonical_hash})", {"hash": schema.canonical_hash, "out": str(args.out)})
    return EXIT_OK


# --- parser ------------------------------------------------------------------------


def _add_learner_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with learner settings")
    parser.add_argument("--max-iterations", type=int)
    parser.add_argument("--ball-radius", type=int)
    parser.add_argument("--max-ball-radius", type=int)
    parser.add_argument("--suffix-check", type=int, help="child moves checked below each closest representative")
    parser.add_argument("--state-cap", type=int, help="largest transducer the verifier may build")
    parser.add_argument("--no-subtree-reuse", action="store_true")
    parser.add_argument("--full-dist-check", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="honeycomb", description="Learn and verify GRTSs of honeycombs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fieldquotient", help="search manifolds over a finite field")
    p.add_argument("--symbol", required=True, help="p,q,r")
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--squared", action="store_true", help="work over the field with prime^2 elements")
    p.add_argument("--limit", type=int, default=SearchConfig().limit)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_fieldquotient)

    p = sub.add_parser("learn", help="learn a verified GRTS from a schema")
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    _add_learner_flags(p)
    p.set_defaults(handler=cmd_learn)

    p = sub.add_parser("verify", help="verify a GRTS against its schema")
    p.add_argument("--grts", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--full-dist-check", action="store_true")
    p.add_argument("--report", help="write the verification report as JSON")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("coordseq", help="print a coordination sequence")
    p.add_argument("--grts", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--root", type=int, default=0)
    p.set_defaults(handler=cmd_coordseq)

    p = sub.add_parser("export", help="export tree nodes as points")
    p.add_argument("--grts", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--model", choices=MODELS, default="poincare_ball")
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_export)

    p = sub.add_parser("builtin", help="write a built-in schema")
    p.add_argument("name", choices=sorted(BUILTIN_SCHEMAS))
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_builtin)
    return parser


def _exit_code(exc: Exception) -> int:
    table: List[Any] = [
        ((ParseError, ConfigError, SchemaError, UsageError, ValueError, OSError), EXIT_USAGE),
        ((NoRoots,), EXIT_NOT_FOUND),
        ((CapExceeded, IterationCapExceeded), EXIT_CAP),
        ((PrecisionAmbiguity,), EXIT_PRECISION),
    ]
    for kinds, code in table:
        if isinstance(exc, kinds):
            return code
    return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = args.log_level or ("DEBUG" if args.verbose else "WARNING")
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(name)s: %(message)s")
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (HoneycombError, ValueError, OSError) as exc:
        code = _exit_code(exc)
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
