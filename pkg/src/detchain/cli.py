"""Command-line front end.

Reads a JSON instance configuration (schema in CONFIG_SCHEMA, published at
docs/config_schema.json), builds the instance, runs the requested
computation, and writes CSV tables / scalar values. Every numeric output row
carries the instance digest and the tolerance applied to it; identical
config, flags, and seed produce byte-identical output files.

Exit codes: 0 all requested tolerances met, 1 a tolerance failed, 2 config
parse/validation error, 3 numerical failure (singular pairing, vanishing
determinant, ...).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .biortho import dual_bases, pairing_expressions
from .chain import (
    ChainSpec,
    ChainTables,
    WeightSet,
    from_indicators,
    from_tables,
    tabulate,
)
from .errors import (
    DetchainError,
    DuplicateNode,
    InvalidInterval,
    InvalidWeight,
    OverlapError,
    ShapeError,
)
from .fredholm import (
    correlation,
    fredholm_det,
    g_resolvent_residual,
    gap_generating_function,
    janossy,
    theorem2_residuals,
)
from .kernels import build_g, build_K, check_kernel, factorization_residual, kernel_via_inverse
from .measure import make_discrete_grid, make_gauss_legendre_grid
from .oracle import (
    enumerate_configurations,
    oracle_correlation,
    oracle_counts,
    oracle_gap,
    oracle_janossy,
)
from .sampler import SamplerConfig, empirical_gap, sample

_NUMBER_ROW = {"type": "array", "items": {"type": "number"}}
_NUMBER_TABLE = {"type": "array", "items": _NUMBER_ROW}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "detchain instance configuration",
    "type": "object",
    "required": ["chain", "grids"],
    "additionalProperties": False,
    "properties": {
        "chain": {
            "type": "object",
            "required": ["family", "m", "N"],
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["monomial_exponential", "tabulated"]},
                "m": {"type": "integer", "minimum": 1},
                "N": {"type": "integer", "minimum": 1},
                "potentials": _NUMBER_TABLE,
                "couplings": _NUMBER_ROW,
                "tables": {
                    "type": "object",
                    "required": ["f", "h", "g"],
                    "additionalProperties": False,
                    "properties": {
                        "f": _NUMBER_TABLE,
                        "h": _NUMBER_TABLE,
                        "g": {"type": "array", "items": _NUMBER_TABLE},
                    },
                },
            },
        },
        "grids": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["kind", "interval", "n"],
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"const": "gauss_legendre"},
                            "interval": {
                                "type": "array",
                                "items": {"type": "number"},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                            "n": {"type": "integer", "minimum": 1},
                        },
                    },
                    {
                        "type": "object",
                        "required": ["kind", "points", "masses"],
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"const": "discrete"},
                            "points": _NUMBER_ROW,
                            "masses": _NUMBER_ROW,
                        },
                    },
                ]
            },
        },
        "weights": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["vectors"],
                    "additionalProperties": False,
                    "properties": {"vectors": _NUMBER_TABLE},
                },
                {
                    "type": "object",
                    "required": ["intervals", "kappas"],
                    "additionalProperties": False,
                    "properties": {
                        "intervals": {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "items": {
                                    "type": "array",
                                    "items": {"type": "number"},
                                    "minItems": 2,
                                    "maxItems": 2,
                                },
                            },
                        },
                        "kappas": _NUMBER_TABLE,
                    },
                },
            ]
        },
        "task": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "points": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                },
                "max_count": {"type": "integer", "minimum": 0},
                "sampler": {
                    "type": "object",
                    "required": ["steps"],
                    "additionalProperties": False,
                    "properties": {
                        "steps": {"type": "integer", "minimum": 1},
                        "burn_in": {"type": "integer", "minimum": 0},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
        "output": {"type": "string"},
    },
}

DEFAULT_TOLERANCE = 1e-10


class ConfigError(Exception):
    """Configuration file cannot be parsed, validated, or assembled."""


@dataclass(frozen=True)
class TaskSpec:
    points: tuple[tuple[int, ...], ...] | None = None
    max_count: int | None = None
    sampler: SamplerConfig | None = None


@dataclass(frozen=True)
class InstanceConfig:
    """A fully assembled instance plus the task parameters of the config file."""

    spec: ChainSpec
    tables: ChainTables
    weights: WeightSet
    weight_intervals: tuple | None
    task: TaskSpec
    output: str | None
    digest: str


def _digest(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def parse_instance(raw: dict, path: str = "<config>") -> InstanceConfig:
    """Validate a raw config dict against the schema and assemble the instance."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: field {loc}: {exc.message}") from exc

    chain_cfg = raw["chain"]
    m, n_rank = chain_cfg["m"], chain_cfg["N"]
    if len(raw["grids"]) != m:
        raise ConfigError(f"{path}: field grids: expected {m} entries, got "
                          f"{len(raw['grids'])}")
    try:
        grids = []
        for level, gc in enumerate(raw["grids"], start=1):
            if gc["kind"] == "gauss_legendre":
                grids.append(make_gauss_legendre_grid(tuple(gc["interval"]),
                                                      gc["n"], level=level))
            else:
                grids.append(make_discrete_grid(gc["points"], gc["masses"],
                                                level=level))
        spec = ChainSpec(
            m=m,
            N=n_rank,
            family=chain_cfg["family"],
            potentials=tuple(tuple(p) for p in chain_cfg["potentials"])
            if "potentials" in chain_cfg else None,
            couplings=tuple(chain_cfg["couplings"])
            if "couplings" in chain_cfg else None,
        )
        if spec.family == "monomial_exponential":
            tables = tabulate(spec, grids)
        else:
            if "tables" not in chain_cfg:
                raise ConfigError(f"{path}: field chain: tabulated family needs "
                                  "explicit tables")
            tb = chain_cfg["tables"]
            tables = from_tables(grids, tb["f"], tb["h"], tb["g"])
            if tables.N != n_rank:
                raise ConfigError(f"{path}: field chain/tables/f: {tables.N} rows "
                                  f"but N = {n_rank}")
        weights_cfg = raw.get("weights")
        weight_intervals = None
        if weights_cfg is None:
            weights = WeightSet.zeros(grids)
        elif "vectors" in weights_cfg:
            weights = WeightSet(tuple(np.asarray(v, dtype=float)
                                      for v in weights_cfg["vectors"]))
            if any(w.size != g.size for w, g in zip(weights.w, grids)):
                raise ConfigError(f"{path}: field weights/vectors: lengths do not "
                                  "match the grids")
            if len(weights.w) != m:
                raise ConfigError(f"{path}: field weights/vectors: expected {m} "
                                  "vectors")
        else:
            weight_intervals = tuple(
                tuple((float(a), float(b)) for a, b in level)
                for level in weights_cfg["intervals"]
            )
            weights = from_indicators(grids, weights_cfg["intervals"],
                                      weights_cfg["kappas"])
    except (ShapeError, InvalidInterval, InvalidWeight, DuplicateNode,
            OverlapError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    task_cfg = raw.get("task", {})
    sampler_cfg = None
    if "sampler" in task_cfg:
        sc = task_cfg["sampler"]
        sampler_cfg = SamplerConfig(steps=sc["steps"],
                                    burn_in=sc.get("burn_in"),
                                    seed=sc.get("seed", 0))
    task = TaskSpec(
        points=tuple(tuple(int(i) for i in lvl) for lvl in task_cfg["points"])
        if "points" in task_cfg else None,
        max_count=task_cfg.get("max_count"),
        sampler=sampler_cfg,
    )
    return InstanceConfig(
        spec=spec,
        tables=tables,
        weights=weights,
        weight_intervals=weight_intervals,
        task=task,
        output=raw.get("output"),
        digest=_digest(raw),
    )


def load_instance(path) -> InstanceConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_instance(raw, path=str(path))


# ---------------------------------------------------------------------------
# output helpers

def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _plain_kernel(inst: InstanceConfig):
    bases = dual_bases(inst.tables, WeightSet.zeros(inst.tables.grids))
    kernel = check_kernel(build_K(bases), build_g(inst.tables,
                                                  WeightSet.zeros(inst.tables.grids)))
    return bases, kernel


# ---------------------------------------------------------------------------
# commands

def cmd_check(inst: InstanceConfig, args) -> int:
    tol = args.tol
    tables, weights = inst.tables, inst.weights
    zeros = WeightSet.zeros(tables.grids)
    rows = []

    res = theorem2_residuals(tables, weights)
    for name, value in res.as_dict().items():
        rows.append((f"identity_{name}", value, tol * res.scale))
    rows.append(("transfer_resolvent", g_resolvent_residual(tables, weights),
                 tol * res.scale))

    plain_b = dual_bases(tables, zeros)
    dual_b = dual_bases(tables, weights)
    rows.append(("biorthogonality_plain", plain_b.biorthogonality_residual, tol))
    rows.append(("biorthogonality_dual", dual_b.biorthogonality_residual, tol))

    for label, ws in (("plain", zeros), ("dual", weights)):
        a1, am = pairing_expressions(tables, ws)
        scale_a = max(1.0, float(np.max(np.abs(a1))))
        rows.append((f"pairing_expressions_{label}",
                     float(np.max(np.abs(a1 - am))), 1e-11 * scale_a))

    built = build_K(dual_b)
    via_inverse = kernel_via_inverse(tables, weights)
    diff = max(
        float(np.max(np.abs(built.block(i, j) - via_inverse.block(i, j))))
        for i in range(1, tables.m + 1) for j in range(1, tables.m + 1)
    )
    kscale = max(1.0, built.max_abs())
    rows.append(("construction_invariance", diff, 1e-12 * kscale))

    for label, bas, ws in (("plain", plain_b, zeros), ("dual", dual_b, weights)):
        kern = build_K(bas)
        transfer = build_g(tables, ws)
        rows.append((f"factorization_{label}",
                     factorization_residual(kern, transfer, tables, ws),
                     1e-11 * max(1.0, kern.max_abs())))

    ok = True
    print(f"instance {inst.digest}")
    for name, value, bound in rows:
        passed = value <= bound
        ok = ok and passed
        print(f"{'PASS' if passed else 'FAIL'}  {name:<28s} "
              f"residual={value:.3e}  bound={bound:.3e}")
    out = args.out or inst.output
    if out:
        _write_csv(out, ["quantity", "residual", "bound", "status", "instance",
                         "tolerance"],
                   [(n, v, b, "pass" if v <= b else "fail", inst.digest, tol)
                    for n, v, b in rows])
    return 0 if ok else 1


def cmd_gap(inst: InstanceConfig, args) -> int:
    _, kernel = _plain_kernel(inst)
    value = fredholm_det(kernel, inst.weights)
    print(_fmt(value))
    out = args.out or inst.output
    if out:
        _write_csv(out, ["quantity", "value", "instance", "tolerance"],
                   [("gap_probability", value, inst.digest, args.tol)])
    return 0


def cmd_janossy(inst: InstanceConfig, args) -> int:
    if inst.task.points is None:
        raise ConfigError("janossy needs task.points in the config")
    _, kernel = _plain_kernel(inst)
    value = janossy(kernel, inst.weights, inst.task.points)
    print(_fmt(value))
    out = args.out or inst.output
    if out:
        _write_csv(out, ["quantity", "points", "value", "instance", "tolerance"],
                   [("janossy_density", json.dumps([list(p) for p in inst.task.points]),
                     value, inst.digest, args.tol)])
    return 0


def cmd_correlate(inst: InstanceConfig, args) -> int:
    if inst.task.points is None:
        raise ConfigError("correlate needs task.points in the config")
    _, kernel = _plain_kernel(inst)
    value = correlation(kernel, inst.task.points)
    print(_fmt(value))
    out = args.out or inst.output
    if out:
        _write_csv(out, ["quantity", "points", "value", "instance", "tolerance"],
                   [("correlation", json.dumps([list(p) for p in inst.task.points]),
                     value, inst.digest, args.tol)])
    return 0


def cmd_counts(inst: InstanceConfig, args) -> int:
    if inst.weight_intervals is None:
        raise ConfigError("counts needs interval-type weights in the config")
    _, kernel = _plain_kernel(inst)
    dist = gap_generating_function(kernel, inst.weight_intervals,
                                   max_count=inst.task.max_count)
    m = inst.tables.m
    header = [f"count_{j + 1}" for j in range(m)] + ["probability", "instance",
                                                     "tolerance"]
    rows = [tuple(counts) + (p, inst.digest, args.tol)
            for counts, p in sorted(dist.probabilities.items())]
    print(_fmt(dist.total))
    out = args.out or inst.output
    if out:
        _write_csv(out, header, rows)
    return 0


def cmd_sample(inst: InstanceConfig, args) -> int:
    if inst.task.sampler is None:
        raise ConfigError("sample needs task.sampler in the config")
    cfg = inst.task.sampler
    if args.seed is not None:
        cfg = SamplerConfig(steps=cfg.steps, burn_in=cfg.burn_in, seed=args.seed,
                            proposal=cfg.proposal)
    bases, kernel = _plain_kernel(inst)
    stream = sample(inst.tables, cfg, bases=bases)
    estimate, stderr = empirical_gap(stream, inst.weights)
    reference = fredholm_det(kernel, inst.weights)
    zscore = abs(estimate - reference) / stderr if stderr > 0 else 0.0
    print(f"empirical_gap {_fmt(estimate)}")
    print(f"stderr {_fmt(stderr)}")
    print(f"fredholm_det {_fmt(reference)}")
    print(f"zscore {_fmt(zscore)}")
    out = args.out or inst.output
    if out:
        _write_csv(out, ["quantity", "value", "stderr", "reference", "zscore",
                         "seed", "instance", "tolerance"],
                   [("empirical_gap", estimate, stderr, reference, zscore,
                     cfg.seed, inst.digest, args.tol)])
    return 0


def cmd_oracle(inst: InstanceConfig, args) -> int:
    bases, kernel = _plain_kernel(inst)
    enum = enumerate_configurations(inst.tables, bases=bases)
    rows = []

    det = fredholm_det(kernel, inst.weights)
    gap = oracle_gap(enum, inst.weights)
    rows.append(("gap_probability", gap, det, abs(det - gap), 1e-10))

    if inst.task.points is not None:
        lib = correlation(kernel, inst.task.points)
        ora = oracle_correlation(enum, inst.task.points)
        rows.append(("correlation", ora, lib, abs(lib - ora), 1e-10))
        if inst.weights.is_indicator():
            lib = janossy(kernel, inst.weights, inst.task.points)
            ora = oracle_janossy(enum, inst.weights, inst.task.points)
            rows.append(("janossy_density", ora, lib, abs(lib - ora), 1e-10))

    if inst.weight_intervals is not None:
        lib_dist = gap_generating_function(kernel, inst.weight_intervals,
                                           max_count=inst.task.max_count)
        ora_dist = oracle_counts(enum, inst.weight_intervals)
        keys = set(lib_dist.probabilities) | set(ora_dist.probabilities)
        diff = max(abs(lib_dist.probability(k) - ora_dist.probability(k))
                   for k in keys)
        rows.append(("count_distribution", ora_dist.total, lib_dist.total,
                     diff, 1e-8))

    ok = True
    print(f"instance {inst.digest}")
    for name, oracle_value, library_value, diff, bound in rows:
        passed = diff <= bound
        ok = ok and passed
        print(f"{'PASS' if passed else 'FAIL'}  {name:<20s} oracle={oracle_value!r} "
              f"library={library_value!r} diff={diff:.3e}")
    out = args.out or inst.output
    if out:
        _write_csv(out, ["quantity", "oracle", "library", "abs_diff", "bound",
                         "status", "instance", "tolerance"],
                   [(n, o, l, d, b, "pass" if d <= b else "fail", inst.digest,
                     args.tol) for n, o, l, d, b in rows])
    return 0 if ok else 1


_COMMANDS = {
    "check": cmd_check,
    "gap": cmd_gap,
    "janossy": cmd_janossy,
    "correlate": cmd_correlate,
    "counts": cmd_counts,
    "sample": cmd_sample,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detchain",
        description="Multilevel determinantal ensembles: kernels, Fredholm "
                    "determinants, and resolvent-identity verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "check": "verify the resolvent identity and all residual identities",
        "gap": "Fredholm determinant (gap probability for indicator weights)",
        "janossy": "exact-occupancy density at the configured points",
        "correlate": "correlation function at the configured points",
        "counts": "count distribution over the configured interval system",
        "sample": "Metropolis run with empirical gap estimate",
        "oracle": "exhaustive enumeration cross-checks (discrete instances)",
    }
    for name, desc in descriptions.items():
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="JSON instance config")
        p.add_argument("--out", default=None, help="CSV output path")
        p.add_argument("--seed", type=int, default=None,
                       help="override the sampler seed")
        p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                       help="base tolerance for identity residuals")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        inst = load_instance(args.config)
        return _COMMANDS[args.command](inst, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DetchainError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
