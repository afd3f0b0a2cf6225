"""
Experiment Configuration

Version: 1.0

Description:
    Loads an experiment from JSON, validates it against CONFIG_SCHEMA (Draft 7,
    jsonschema) and builds the components, the coupling and the numerics.

    Rationals are JSON integers or "num/den" strings; matrices are lists of rows;
    discs are {"center": rational, "radius": rational exponent}.

Usage:
    config = ExperimentConfig.load("configs/tate.json")
    lap = config.laplacian(threads=2)
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema
import platformdirs

from scripts.errors import ConfigError, DepthError, DivergenceError, FormVanishesError, SchemaError
from scripts.padic import HYPERBOLIC, Disc, Mobius, as_fraction, check_prime, classify, p_power
from scripts.schottky import GoodFundamentalDomain, SchottkyGroup, ValidationReport, length_series, validate_fundamental_domain
from scripts.spectral import INTEGRATION_MODES, ZUNIGA_EXPONENTS, ComponentConfig, CouplingConfig, ShimuraLaplacian
from scripts.ultrametric import NORMALIZATIONS, BranchLevel, OmegaForm

logger = logging.getLogger(__name__)

APP_NAME = "ultralap"
THREADS_ENV = "ULTRALAP_THREADS"

_RATIONAL = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^-?\d+(/-?\d+)?$"},
    ]
}
_RATIONALS = {"type": "array", "items": _RATIONAL, "minItems": 1}
_DISC = {
    "type": "object",
    "required": ["center", "radius"],
    "properties": {"center": _RATIONAL, "radius": _RATIONAL},
    "additionalProperties": False,
}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _RATIONAL, "minItems": 2, "maxItems": 2}, "minItems": 2, "maxItems": 2}
_TIMES = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}
_INITIAL = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["wavelet", "indicator", "values"]},
        "anchor": {"type": "string"},
        "index": {"type": "integer", "minimum": 1},
        "leaves": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "values": {"type": "array", "items": {"type": "number"}},
    },
}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "ultralap experiment",
    "type": "object",
    "required": ["prime", "components"],
    "properties": {
        "prime": {"type": "integer", "minimum": 2},
        "components": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["generators", "fundamental_domain", "orbits", "alpha"],
                "properties": {
                    "generators": {"type": "array", "items": _MATRIX, "minItems": 1},
                    "fundamental_domain": {"type": "array", "items": _DISC, "minItems": 2},
                    "orbits": {"type": "array", "items": _DISC, "minItems": 1},
                    "branching": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["children", "drop"],
                            "properties": {"children": {"type": "integer", "minimum": 1}, "drop": _RATIONAL},
                        },
                    },
                    "normalization": {"enum": list(NORMALIZATIONS)},
                    "omega": {
                        "type": "object",
                        "required": ["numerator", "denominator"],
                        "properties": {"numerator": _RATIONALS, "denominator": _RATIONALS},
                    },
                    "alpha": _RATIONAL,
                    "shift": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                },
                "additionalProperties": False,
            },
        },
        "coupling": {
            "type": "object",
            "properties": {
                "alpha_z": _RATIONAL,
                "weights": {"type": "array", "items": {"type": "array", "items": _RATIONAL}},
                "zuniga_exponent": {"enum": list(ZUNIGA_EXPONENTS)},
            },
            "additionalProperties": False,
        },
        "numerics": {
            "type": "object",
            "properties": {
                "depth": {"type": "integer", "minimum": 0},
                "max_length": {"type": "integer", "minimum": 0},
                "max_words": {"type": "integer", "minimum": 1},
                "integration": {"enum": list(INTEGRATION_MODES)},
                "tolerances": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
            },
            "additionalProperties": False,
        },
        "heat": {"type": "object", "properties": {"times": _TIMES, "initial": _INITIAL}},
        "kernel": {
            "type": "object",
            "properties": {
                "times": _TIMES,
                "pairs": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}},
            },
        },
        "sample": {
            "type": "object",
            "properties": {
                "start": {"type": "integer", "minimum": 0},
                "horizon": {"type": "number", "exclusiveMinimum": 0},
                "paths": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "bvp": {
            "type": "object",
            "required": ["region", "condition", "initial"],
            "properties": {
                "region": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                "condition": {"enum": ["dirichlet", "von_neumann"]},
                "initial": _INITIAL,
                "times": _TIMES,
            },
        },
    },
    "additionalProperties": False,
}

DEFAULT_TOLERANCES = {"refinement": 1e-12, "support": 1e-10}


@dataclass
class Numerics:
    depth: int = 2
    max_length: int = 2
    max_words: Optional[int] = 200_000
    integration: str = "full_domain"
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


def validate_schema(data: Dict[str, Any]):
    """
    Raises:
        SchemaError: On the first schema violation, with its JSON path.
    """
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.path))
    if errors:
        first = errors[0]
        where = "/".join(str(p) for p in first.path) or "<root>"
        raise SchemaError(f"Config error at {where}: {first.message}")


def _disc(d: dict, prime: int) -> Disc:
    return Disc(as_fraction(d["center"]), as_fraction(d["radius"]), prime)


def _group(block: dict, prime: int) -> SchottkyGroup:
    return SchottkyGroup(prime, [Mobius.from_rows(rows, prime) for rows in block["generators"]])


def _component(index: int, block: dict, prime: int) -> ComponentConfig:
    omega = block.get("omega")
    branching = block.get("branching")
    return ComponentConfig(
        index=index,
        group=_group(block, prime),
        domain=GoodFundamentalDomain([_disc(d, prime) for d in block["fundamental_domain"]]),
        orbits=[_disc(d, prime) for d in block["orbits"]],
        alpha=as_fraction(block["alpha"]),
        omega=OmegaForm(omega["numerator"], omega["denominator"], prime) if omega else None,
        branching=[BranchLevel(b["children"], b["drop"]) for b in branching] if branching else None,
        normalization=block.get("normalization", "diameter"),
        shift=tuple(block.get("shift", ())),
    )


def _coupling(block: dict, n: int) -> CouplingConfig:
    weights = block.get("weights", [[0] * n for _ in range(n)])
    if len(weights) != n:
        raise ConfigError(f"coupling.weights must be {n} x {n}")
    return CouplingConfig(weights, block.get("alpha_z", 1), block.get("zuniga_exponent", "proof"))


def read_json(path) -> Dict[str, Any]:
    """
    Raises:
        ConfigError: If the file does not exist.
        SchemaError: If it is not valid JSON.
    """
    path = Path(path)
    logger.info("🔄 Loading config %s", path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path} is not valid JSON: {e}") from e


def config_hash(data: Dict[str, Any]) -> str:
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class ExperimentConfig:
    """
    Attributes:
        prime (int): p.
        components (list[ComponentConfig]): Validated components.
        coupling (CouplingConfig): Weights and alpha_Z.
        numerics (Numerics): Depth, word length, budgets.
        raw (dict): The JSON document as loaded.
    """
    prime: int
    components: List[ComponentConfig]
    coupling: CouplingConfig
    numerics: Numerics
    raw: Dict[str, Any]
    source: Optional[Path] = None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        config = cls.from_dict(read_json(path))
        config.source = path
        return config

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        validate_schema(data)
        prime = data["prime"]
        components = [_component(i, block, prime) for i, block in enumerate(data["components"])]
        coupling = _coupling(data.get("coupling", {}), len(components))
        for comp in components:
            length_series(comp.rank, prime, coupling.alpha_z, 0)
        numerics = Numerics(**{**Numerics().__dict__, **data.get("numerics", {})})
        numerics.tolerances = {**DEFAULT_TOLERANCES, **numerics.tolerances}
        return cls(prime, components, coupling, numerics, data)

    def config_hash(self) -> str:
        return config_hash(self.raw)

    def laplacian(self, depth: Optional[int] = None, threads: int = 1) -> ShimuraLaplacian:
        n = self.numerics
        return ShimuraLaplacian(
            self.components, self.coupling, n.depth if depth is None else depth, n.max_length,
            n.max_words, n.integration, threads,
        )

    def task(self, name: str) -> Dict[str, Any]:
        return self.raw.get(name, {})


def resolve_threads(value: Optional[int] = None) -> int:
    """--threads, else $ULTRALAP_THREADS, else 1."""
    if value is not None:
        return max(1, int(value))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from e
    return 1


def default_output_dir(data: Dict[str, Any]) -> Path:
    return Path(platformdirs.user_data_dir(APP_NAME)) / "runs" / config_hash(data)[:16]


def validate_config(data: Dict[str, Any]) -> ValidationReport:
    """
    Runs every check a config must pass and reports each outcome instead of
    stopping at the first failure.
    """
    report = ValidationReport()
    try:
        validate_schema(data)
    except SchemaError as e:
        report.add("schema", False, str(e))
        return report
    report.add("schema", True)
    prime = data["prime"]
    try:
        check_prime(prime)
    except ConfigError as e:
        report.add("prime", False, str(e))
        return report
    report.add("prime", True, str(prime))
    coupling_block = data.get("coupling", {})
    alpha_z = coupling_block.get("alpha_z", 1)
    for i, block in enumerate(data["components"]):
        try:
            matrices = [Mobius.from_rows(rows, prime) for rows in block["generators"]]
            for k, m in enumerate(matrices):
                report.add(f"component {i} generator {k} hyperbolic", classify(m) == HYPERBOLIC, repr(m))
            group = SchottkyGroup(prime, matrices)
            domain = GoodFundamentalDomain([_disc(d, prime) for d in block["fundamental_domain"]])
        except ConfigError as e:
            report.add(f"component {i} group", False, str(e))
            continue
        for entry in validate_fundamental_domain(group, domain).entries:
            report.add(f"component {i} {entry['check']}", entry["ok"], entry["detail"])
        rank = group.rank
        alpha = as_fraction(block["alpha"])
        diverged = False
        for label, s in (("alpha", alpha), ("alpha_Z", as_fraction(alpha_z))):
            x = p_power(prime, -s)
            sharp = (2 * rank - 1) * x < 1
            report.add(f"convergence component {i} {label}", sharp, f"(2g-1) p^-s = {float((2 * rank - 1) * x):.6g}")
            diverged = diverged or not sharp
            if sharp and 2 * rank * x >= 1:
                logger.warning("⚠️ Component %d: p^%s = %s <= 2g = %d", i, label, float(1 / x), 2 * rank)
                report.add(f"crude condition component {i} {label}", True, f"warning: p^s <= 2g = {2 * rank}")
        try:
            comp = _component(i, block, prime)
            comp.partition(data.get("numerics", {}).get("depth", Numerics.depth))
            report.add(f"component {i} orbits", True, f"{len(comp.orbits)} orbit roots")
        except DivergenceError as e:
            if not diverged:
                report.add(f"convergence component {i} series", False, str(e))
        except (ConfigError, DepthError, FormVanishesError) as e:
            report.add(f"component {i} orbits", False, str(e))
    try:
        _coupling(coupling_block, len(data["components"]))
        report.add("coupling", True)
    except ConfigError as e:
        report.add("coupling", False, str(e))
    return report
