"""
Configuration for honeycomb: numeric tolerances, learner knobs and search limits.

Learner settings can be read from a JSON file whose keys are exactly the field
names of :class:`LearnerConfig`.
"""

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Type, TypeVar, Union

from honeycomb.errors import ConfigError, ParseError

T = TypeVar("T")


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances shared by geometry, graph and verifier."""

    kappa: float = 1e-6
    beta: float = 1e-3
    epsilon: float = 1e-7


DEFAULT_TOLERANCES = Tolerances()


def _from_mapping(cls: Type[T], values: Mapping[str, Any]) -> T:
    fields = {f.name: f for f in dataclasses.fields(cls)}  # type: ignore[arg-type]
    unknown = sorted(set(values) - set(fields))
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(unknown)}")
    checked: Dict[str, Any] = {}
    for name, value in values.items():
        default = getattr(cls(), name)
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{name} must be a boolean, got {value!r}")
        elif isinstance(default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            if value < 0:
                raise ConfigError(f"{name} must be non-negative, got {value}")
        checked[name] = value
    return cls(**checked)


@dataclass(frozen=True)
class LearnerConfig:
    """Knobs of the learning loop and of the verifier it drives."""

    max_iterations: int = 16
    ball_radius: int = 4
    suffix_check_l: int = 3
    subtree_reuse: bool = True
    max_ball_radius: int = 12
    side_budget: int = 10_000
    state_cap: int = 50_000
    depth_cap: int = 30
    full_dist_check: bool = False
    full_dist_depth: int = 5

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "LearnerConfig":
        """Build a config from a mapping, rejecting unknown or ill-typed keys."""
        return _from_mapping(cls, values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "LearnerConfig":
        """Read a JSON config file.

        Raises:
            ParseError: If the file is not a JSON object.
            ConfigError: If a key is unknown or has the wrong type.
        """
        text = Path(path).read_text(encoding="utf-8")
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid config file {path}: {exc.msg}", exc.lineno, exc.colno) from exc
        if not isinstance(values, dict):
            raise ParseError(f"config file {path} must contain a JSON object", 1, 1)
        return cls.from_mapping(values)

    def replace(self, **changes: Any) -> "LearnerConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SearchConfig:
    """Limits for the finite-field manifold search."""

    group_cap: int = 1_000_000
    limit: int = 4
    max_solution_space: int = 2_000_000
    max_quotient_generators: int = 2

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "SearchConfig":
        return _from_mapping(cls, values)

    def replace(self, **changes: Any) -> "SearchConfig":
        return dataclasses.replace(self, **changes)
