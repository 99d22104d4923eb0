"""Command line front end: ``chiralwalk index|spectrum|eigenstate|verify MODEL.json``.

Every command prints one JSON report on stdout. Exit codes: 0 ok,
2 schema/range error, 3 I/O error, 4 not Fredholm, 5 zero index,
6 window too small, 7 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import jsonschema
import numpy as np

from . import __version__
from .errors import (
    ChiralWalkError,
    IoError,
    NotFredholm,
    NotHermitianFamily,
    RangeError,
    SchemaError,
    ShapeMismatch,
    SupremumViolated,
    UnsupportedPeriod,
    WindowTooSmall,
    ZeroIndex,
)
from .fredholm import DEFAULT_SAMPLES, essential_spectrum_bands, essential_spectrum_cloud, fredholm_index
from .lattice import PeriodicTailSequence, StrictlyLocalOperator, validate
from .report import dumps, envelope, write_cloud_csv, write_eigenstate_csv, write_spectrum_csv
from .splitstep import (
    SIGNS,
    SplitStepModel,
    closed_bands,
    evolution_operator,
    gamma_operator,
    index_pm,
    normalize_sign,
    side_bands,
    sign_name,
)

EXIT_OK, EXIT_SCHEMA, EXIT_IO, EXIT_NOT_FREDHOLM, EXIT_ZERO_INDEX, EXIT_WINDOW, EXIT_VERIFY = 0, 2, 3, 4, 5, 6, 7

_EXIT_FOR = {
    SchemaError: EXIT_SCHEMA,
    RangeError: EXIT_SCHEMA,
    ShapeMismatch: EXIT_SCHEMA,
    SupremumViolated: EXIT_SCHEMA,
    IoError: EXIT_IO,
    NotFredholm: EXIT_NOT_FREDHOLM,
    ZeroIndex: EXIT_ZERO_INDEX,
    WindowTooSmall: EXIT_WINDOW,
}

# model files ---------------------------------------------------------------

_NUMBER = {"type": "number"}
_ENTRY = {"oneOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _ENTRY}}


def _sequence_schema(value):
    table = {"type": "array", "minItems": 1, "items": value}
    return {
        "type": "object",
        "required": ["left_period", "right_period"],
        "additionalProperties": False,
        "properties": {
            "left_period": table,
            "right_period": table,
            "core": {
                "type": "object",
                "required": ["start", "values"],
                "additionalProperties": False,
                "properties": {"start": {"type": "integer"}, "values": {"type": "array", "items": value}},
            },
        },
    }


SPLITSTEP_SCHEMA = {
    "type": "object",
    "required": ["kind", "p", "a"],
    "additionalProperties": False,
    "properties": {
        "kind": {"const": "splitstep"},
        "p": _sequence_schema(_NUMBER),
        "a": _sequence_schema(_NUMBER),
    },
}

STRICTLY_LOCAL_SCHEMA = {
    "type": "object",
    "required": ["kind", "n", "k0", "coeffs"],
    "additionalProperties": False,
    "properties": {
        "kind": {"const": "strictly_local"},
        "n": {"type": "integer", "minimum": 1},
        "k0": {"type": "integer", "minimum": 0},
        "coeffs": {
            "type": "object",
            "minProperties": 1,
            "propertyNames": {"pattern": "^-?[0-9]+$"},
            "additionalProperties": _sequence_schema(_MATRIX),
        },
    },
}


def _validate_schema(doc, schema):
    error = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(schema).iter_errors(doc))
    if error is not None:
        raise SchemaError(f"{error.json_path}: {error.message}", path=error.json_path)


def _scalar_sequence(doc, path) -> PeriodicTailSequence:
    for key in ("left_period", "right_period"):
        for i, v in enumerate(doc[key]):
            if not -1.0 <= v <= 1.0:
                raise RangeError(f"{path}.{key}[{i}] = {v} is outside [-1, 1]", path=f"{path}.{key}[{i}]")
    core = doc.get("core", {"start": 0, "values": []})
    for i, v in enumerate(core["values"]):
        if not -1.0 <= v <= 1.0:
            raise RangeError(f"{path}.core.values[{i}] = {v} is outside [-1, 1]", path=f"{path}.core.values[{i}]")
    return PeriodicTailSequence.from_tails(
        np.asarray(doc["left_period"], float), np.asarray(doc["right_period"], float),
        np.asarray(core["values"], float), core["start"],
    )


def _matrix(doc, n, path) -> np.ndarray:
    if len(doc) != n or any(len(row) != n for row in doc):
        raise RangeError(f"{path} must be a {n}x{n} matrix", path=path)
    return np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in row] for row in doc])


def _matrix_sequence(doc, n, path) -> PeriodicTailSequence:
    def table(items, sub):
        mats = [_matrix(m, n, f"{path}.{sub}[{i}]") for i, m in enumerate(items)]
        return np.array(mats, dtype=complex).reshape(-1, n, n)

    core = doc.get("core", {"start": 0, "values": []})
    return PeriodicTailSequence(
        core["start"], table(core["values"], "core.values"),
        table(doc["left_period"], "left_period"), table(doc["right_period"], "right_period"),
    )


def model_from_dict(doc):
    if not isinstance(doc, dict) or doc.get("kind") not in ("splitstep", "strictly_local"):
        raise SchemaError("$.kind: must be 'splitstep' or 'strictly_local'", path="$.kind")
    if doc["kind"] == "splitstep":
        _validate_schema(doc, SPLITSTEP_SCHEMA)
        return SplitStepModel(_scalar_sequence(doc["p"], "$.p"), _scalar_sequence(doc["a"], "$.a"))
    _validate_schema(doc, STRICTLY_LOCAL_SCHEMA)
    n, k0 = doc["n"], doc["k0"]
    coeffs = {}
    for key, seq in doc["coeffs"].items():
        k = int(key)
        if abs(k) > k0:
            raise RangeError(f"$.coeffs.{key}: |k| exceeds k0 = {k0}", path=f"$.coeffs.{key}")
        coeffs[k] = _matrix_sequence(seq, n, f"$.coeffs.{key}")
    op = StrictlyLocalOperator(n, coeffs).aligned()
    report = validate(op)
    if not report.ok:
        raise RangeError("; ".join(v["message"] for v in report.violations), violations=report.violations)
    return report.operator


def parse_model(path):
    """Load and validate a model file (split-step walk or general operator)."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror}", path=str(path)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return doc, model_from_dict(doc)


# commands ------------------------------------------------------------------

def _series_index(j):
    return {1: 1, 2: -1, None: 0}[j]


def cmd_index(doc, model, args):
    from .eigenstate import series_branch

    if isinstance(model, StrictlyLocalOperator):
        rep = fredholm_index(model, args.samples)
        status = EXIT_OK if rep.fredholm else EXIT_NOT_FREDHOLM
        return rep.to_dict(), rep.warnings, status
    rep = index_pm(model, args.samples)
    out = rep.to_dict()
    routes = {}
    for sign in SIGNS:
        name = sign_name(sign)
        entry = out["per_sign"][name]
        if entry["fredholm"]:
            j = series_branch(model, sign)
            routes[name] = {
                "closed_form": entry["index"],
                "winding": entry["winding_index"],
                "series_branch": j,
                "series": _series_index(j),
            }
            routes[name]["agree"] = len({routes[name][k] for k in ("closed_form", "winding", "series")}) == 1
    out["routes"] = routes
    status = EXIT_OK if rep.fredholm else EXIT_NOT_FREDHOLM
    if not rep.fredholm:
        out["diagnostic"] = "NotFredholm: +1 or -1 lies in the essential spectrum of U"
    return out, rep.warnings, status


def cmd_spectrum(doc, model, args):
    from .plotting import plot_arcs

    warnings = []
    if isinstance(model, StrictlyLocalOperator):
        try:
            bands = essential_spectrum_bands(model, args.samples)
        except NotHermitianFamily:
            cloud = essential_spectrum_cloud(model, args.samples)
            if args.csv:
                write_cloud_csv(args.csv, cloud)
            if args.svg:
                plot_arcs(args.svg, [], cloud.points, title="symbol eigenvalues")
            mod = np.abs(cloud.points)
            return {
                "kind": "cloud",
                "count": int(cloud.points.size),
                "resolution": cloud.resolution,
                "modulus_min": float(mod.min()),
                "modulus_max": float(mod.max()),
            }, ["symbol is not Hermitian; reporting the eigenvalue cloud"], EXIT_OK
        out = {"kind": "bands", **bands.to_dict()}
    else:
        per_side = {side: side_bands(model, side, args.samples) for side in ("L", "R")}
        bands = per_side["L"].union(per_side["R"])
        out = {"kind": "bands", **bands.to_dict(),
               "sides": {s: b.to_dict() for s, b in per_side.items()}}
        closed = {}
        worst = 0.0
        for side, sampled in per_side.items():
            try:
                cb = closed_bands(model, side)
            except UnsupportedPeriod as exc:
                warnings.append(f"{exc.code}: side {side} has tail period {exc.details['period']}")
                continue
            entry = cb.to_dict()
            entry["discrepancy"] = cb.bands.endpoint_distance(sampled)
            worst = max(worst, entry["discrepancy"])
            closed[side] = entry
        out["closed_form"] = closed
        if closed:
            out["max_endpoint_discrepancy"] = worst
    if args.csv:
        write_spectrum_csv(args.csv, bands.intervals, bands.arcs)
    if args.svg:
        plot_arcs(args.svg, bands.arcs)
    return out, warnings, EXIT_OK


def cmd_eigenstate(doc, model, args):
    from .eigenstate import protected_state
    from .plotting import plot_profile

    if not isinstance(model, SplitStepModel):
        raise SchemaError("eigenstate needs a splitstep model", path="$.kind")
    sign = normalize_sign(args.sign)
    index_pm(model, args.samples, cross_check=False).require_fredholm()
    try:
        bundle = protected_state(model, sign, args.window)
    except WindowTooSmall as exc:
        payload = exc.details["bundle"].to_dict()
        payload["error"] = exc.code
        return payload, [f"{exc.code}: {exc}"], EXIT_WINDOW
    if args.csv:
        write_eigenstate_csv(args.csv, bundle)
    if args.svg:
        plot_profile(args.svg, bundle.sites, bundle.norm_sq)
    out = bundle.to_dict()
    out["norm_sq_at_zero"] = float(bundle.norm_sq[bundle.sites == 0][0])
    return out, bundle.warnings, EXIT_OK


def cmd_verify(doc, model, args):
    from .verify import check_model, check_operator, check_pair, run_checks

    if isinstance(model, StrictlyLocalOperator):
        checks = run_checks(check_operator, model, args.samples, args.oracle_cells)
    else:
        checks = run_checks(check_pair, gamma_operator(model), evolution_operator(model), model,
                            args.samples, args.oracle_cells)
        checks += run_checks(check_model, model, args.samples, args.oracle_cells)
    passed = all(c.passed for c in checks)
    out = {"passed": passed, "checks": [c.to_dict() for c in checks]}
    return out, [], EXIT_OK if passed else EXIT_VERIFY


COMMANDS = {
    "index": cmd_index,
    "spectrum": cmd_spectrum,
    "eigenstate": cmd_eigenstate,
    "verify": cmd_verify,
}


def _default_samples() -> int:
    env = os.environ.get("CHIRALWALK_SAMPLES")
    if env:
        try:
            return max(8, int(env))
        except ValueError:
            pass
    return DEFAULT_SAMPLES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiralwalk",
        description="Indices, essential spectra and protected eigenstates of chiral walks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("model", help="model JSON file")
    parser.add_argument("--samples", type=int, default=None,
                        help="phase samples on the circle (default 1024 or $CHIRALWALK_SAMPLES)")
    parser.add_argument("--csv", default=None, help="write a CSV table here")
    parser.add_argument("--svg", default=None, help="write an SVG figure here")
    parser.add_argument("--sign", choices=["plus", "minus"], default="plus",
                        help="eigenvalue +1 (plus) or -1 (minus) for eigenstate")
    parser.add_argument("--window", type=int, default=128, help="eigenstate window half-width")
    parser.add_argument("--oracle-cells", type=int, default=32, help="ring cells for verify")
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    if args.samples is None:
        args.samples = _default_samples()
    params = {
        "samples": args.samples,
        "sign": args.sign,
        "window": args.window,
        "oracle_cells": args.oracle_cells,
    }
    doc = {}
    try:
        doc, model = parse_model(args.model)
        results, warnings, status = COMMANDS[args.command](doc, model, args)
    except ChiralWalkError as exc:
        code = next((c for cls, c in _EXIT_FOR.items() if isinstance(exc, cls)), 1)
        details = {k: v for k, v in exc.details.items() if k != "bundle"}
        results = {"error": exc.code, "message": str(exc), "details": details}
        rep = envelope(args.command, doc, params, results, [], status="error")
        stdout.write(dumps(rep))
        return code
    rep = envelope(args.command, doc, params, results, warnings,
                   status="ok" if status == EXIT_OK else "failed")
    stdout.write(dumps(rep))
    return status


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
