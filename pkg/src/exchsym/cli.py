"""Command-line entry point.

Subcommands: ``canon``, ``sample``, ``check``, ``train`` and ``report``.
Every JSON document read or written is validated against a versioned schema.
Exit codes: 0 success / all checks passed, 1 a check failed or training
diverged, 2 bad input, 3 request exceeds the feasibility limits.
"""

import argparse
import json
import logging
import sys
import time
from typing import Optional

import jsonschema
import numpy as np

from .groups import GroupSizeError, GroupSpec, SymmetryError
from .invariants import canon_array, orbit_law_sample
from .layers import (LayerStack, SetLayerParams, TrainingDivergedError, evaluate_mse, exch_matrix_layer,
                     fit_matrix_layer, matrix_dataset, matrix_features, set_dataset, sgd_train, stack_forward,
                     stack_to_dict)
from .numkit import NoiseSource, ShapeError, mlp_init
from .suites import SUITES, run_suite
from .symtest import check_equivariance_exhaustive, check_invariance_exhaustive

log = logging.getLogger("exchsym")

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_FEASIBILITY = 0, 1, 2, 3

_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}
_INT = {"type": "integer"}
_VERSION = {"const": SCHEMA_VERSION}
_NESTED = {"type": ["array", "number"]}
_GROUP = {
    "type": "object",
    "properties": {"kind": {"enum": ["seq", "separate", "joint"]},
                   "sizes": {"type": "array", "items": _INT},
                   "symmetric": {"type": "boolean"}},
    "required": ["kind", "sizes"],
    "additionalProperties": False,
}
_REPORT = {
    "type": "object",
    "properties": {"name": {"type": "string"}, "passed": {"type": "boolean"}, "statistic": _NUM_OR_NULL,
                   "p_value": _NUM_OR_NULL, "max_deviation": _NUM_OR_NULL, "cases_checked": _INT,
                   "warnings": {"type": "array", "items": {"type": "string"}}, "details": {"type": "object"}},
    "required": ["name", "passed", "statistic", "p_value", "max_deviation", "cases_checked", "warnings",
                 "details"],
    "additionalProperties": False,
}


def _obj(props: dict, required, **extra) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False, **extra}


SCHEMAS = {
    "canon_input": _obj({"schema_version": _VERSION, "array": _NESTED, "group": _GROUP},
                        ["schema_version", "array"]),
    "canon_result": _obj({"schema_version": _VERSION, "kind": {"const": "canon_result"}, "group": _GROUP,
                          "input": _NESTED, "canon": _NESTED,
                          "witness": {"type": "array", "items": {"type": "array", "items": _INT}},
                          "orbit_size": _INT, "stabilizer_order": _INT},
                         ["schema_version", "kind", "group", "input", "canon", "witness", "orbit_size",
                          "stabilizer_order"]),
    "sample_result": _obj({"schema_version": _VERSION, "kind": {"const": "sample_result"}, "group": _GROUP,
                           "seed": _INT, "rep": _NESTED, "samples": {"type": "array"}},
                          ["schema_version", "kind", "group", "seed", "rep", "samples"]),
    "check_config": _obj({"schema_version": _VERSION, "seed": _INT,
                          "suites": {"type": "array", "items": {"enum": sorted(SUITES)}},
                          "tolerance": {"type": "number", "minimum": 0}, "bitexact": {"type": "boolean"}},
                         ["schema_version", "seed", "suites"]),
    "check_report": _obj({"schema_version": _VERSION, "kind": {"const": "check_report"}, "seed": _INT,
                          "tolerance": _NUM, "bitexact": {"type": "boolean"}, "passed": {"type": "boolean"},
                          "suites": {"type": "array", "items": {"type": "string"}},
                          "reports": {"type": "array", "items": _REPORT},
                          "warnings": {"type": "array", "items": {"type": "string"}}},
                         ["schema_version", "kind", "seed", "tolerance", "bitexact", "passed", "suites",
                          "reports", "warnings"]),
    "train_config": _obj({"schema_version": _VERSION, "seed": _INT,
                          "task": {"enum": ["sum", "mean", "max", "variance", "matrix"]},
                          "set_size": {"type": "integer", "minimum": 1},
                          "matrix_shape": {"type": "array", "items": {"type": "integer", "minimum": 1},
                                           "minItems": 2, "maxItems": 2},
                          "n_train": {"type": "integer", "minimum": 1},
                          "n_test": {"type": "integer", "minimum": 1},
                          "epochs": {"type": "integer", "minimum": 0},
                          "lr": {"type": "number", "minimum": 0},
                          "batch_size": {"type": "integer", "minimum": 1},
                          "pooling": {"enum": ["sum", "mean", "max", "logsumexp", "ustat"]},
                          "k": {"type": "integer", "minimum": 1},
                          "hidden": {"type": "integer", "minimum": 1},
                          "noise_dims": {"type": "integer", "minimum": 0},
                          "model_path": {"type": "string"}},
                         ["schema_version", "seed", "task"]),
    "train_metrics": _obj({"schema_version": _VERSION, "kind": {"const": "train_metrics"}, "seed": _INT,
                           "task": {"type": "string"}, "epochs": _INT, "train_mse": _NUM, "test_mse": _NUM,
                           "loss_trace": {"type": "array", "items": _NUM}, "seconds": _NUM,
                           "invariance_audit": _REPORT, "model": {"type": "object"}},
                          ["schema_version", "kind", "seed", "task", "epochs", "train_mse", "test_mse",
                           "loss_trace", "invariance_audit", "model"]),
}

TRAIN_DEFAULTS = {"set_size": 5, "matrix_shape": [3, 4], "n_train": 10000, "n_test": 2000, "epochs": 20,
                  "lr": 0.02, "batch_size": 32, "pooling": "sum", "k": 2, "hidden": 16, "noise_dims": 0}


class InputError(ValueError):
    """Malformed or schema-violating input (exit code 2)."""


def validate(doc, schema_name: str):
    try:
        jsonschema.validate(doc, SCHEMAS[schema_name])
    except jsonschema.ValidationError as e:
        raise InputError(f"{schema_name}: {e.message}") from None
    return doc


def dumps(doc) -> str:
    """Compact JSON; floats use the shortest repr that round-trips exactly."""
    return json.dumps(doc, allow_nan=False, sort_keys=True)


def _read_json(path: str):
    try:
        with (sys.stdin if path == "-" else open(path)) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from None


def _emit(doc, schema_name: str, out: Optional[str]) -> None:
    validate(doc, schema_name)
    text = dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _group_from_args(args, shape) -> GroupSpec:
    if args.group == "seq":
        return GroupSpec.seq(shape[0])
    if args.group == "separate":
        return GroupSpec.separate(*shape)
    if len(shape) < 2 or len(set(shape)) != 1:
        raise InputError(f"joint group needs a square array, got shape {tuple(shape)}")
    return GroupSpec.joint(shape[0], len(shape), symmetric=not args.directed)


def _load_array(path):
    doc = _read_json(path)
    if isinstance(doc, dict):
        validate(doc, "canon_input")
        arr, group = doc["array"], doc.get("group")
    else:
        arr, group = doc, None
    try:
        x = np.array(arr, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InputError(f"array is not rectangular numeric data: {e}") from None
    if x.ndim == 0 or x.size == 0 or not np.all(np.isfinite(x)):
        raise InputError("array must be non-empty and finite")
    return x, group


def _resolve_group(args, x, group) -> GroupSpec:
    if args.group is not None:
        return _group_from_args(args, x.shape)
    if group is not None:
        return GroupSpec.from_dict(group)
    raise InputError("no group given: use --group or a 'group' entry in the input")


def cmd_canon(args) -> int:
    x, group = _load_array(args.input)
    spec = _resolve_group(args, x, group)
    res = canon_array(x, spec, method=args.method)
    _emit({"schema_version": SCHEMA_VERSION, "kind": "canon_result", "group": spec.to_dict(),
           "input": x.tolist(), "canon": res.canon.tolist(), "witness": [list(p) for p in res.witness.images()],
           "orbit_size": int(res.orbit_size), "stabilizer_order": int(res.stabilizer_order)},
          "canon_result", args.out)
    return EXIT_OK


def _need_seed(args, config=None) -> int:
    if args.seed is not None:
        return args.seed
    if config is not None and "seed" in config:
        return config["seed"]
    raise InputError("a seed is required (--seed or 'seed' in the config)")


def cmd_sample(args) -> int:
    x, group = _load_array(args.input)
    spec = _resolve_group(args, x, group)
    seed = _need_seed(args)
    if args.count < 0:
        raise InputError("--count must be >= 0")
    src = NoiseSource(seed)
    samples = []
    for _ in range(args.count):
        y, src = orbit_law_sample(x, spec, src)
        samples.append(y.tolist())
    _emit({"schema_version": SCHEMA_VERSION, "kind": "sample_result", "group": spec.to_dict(), "seed": seed,
           "rep": x.tolist(), "samples": samples}, "sample_result", args.out)
    return EXIT_OK


def run_check(config: dict, seed: Optional[int] = None, tol: Optional[float] = None,
              bitexact: Optional[bool] = None) -> dict:
    """Run the suites named in a check config and build the report document."""
    validate(config, "check_config")
    seed = config["seed"] if seed is None else seed
    tol = config.get("tolerance", 1e-9) if tol is None else tol
    bitexact = config.get("bitexact", False) if bitexact is None else bitexact
    warnings, reports = [], []
    if not config["suites"]:
        warnings.append("no suites requested")
    for name in config["suites"]:
        for r in run_suite(name, seed, tol, bitexact):
            r.details["suite"] = name
            reports.append(r.to_dict())
    return {"schema_version": SCHEMA_VERSION, "kind": "check_report", "seed": seed, "tolerance": tol,
            "bitexact": bitexact, "passed": all(r["passed"] for r in reports), "suites": list(config["suites"]),
            "reports": reports, "warnings": warnings}


def cmd_check(args) -> int:
    config = _read_json(args.config)
    if isinstance(config, dict) and "seed" not in config and args.seed is not None:
        config = dict(config, seed=args.seed)
    doc = run_check(config, args.seed, args.tol, True if args.bitexact else None)
    for w in doc["warnings"]:
        log.warning(w)
    _emit(doc, "check_report", args.out)
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def build_set_stack(cfg: dict, src: NoiseSource) -> LayerStack:
    """Deep Sets stack: ``phi`` (1 -> h -> h), pooling, ``rho`` (h -> h -> 1).
    ``ustat`` pooling feeds ``k`` elements to ``phi`` and uses a one-layer head."""
    h, k, nd = cfg["hidden"], cfg["k"], cfg["noise_dims"]
    if cfg["pooling"] == "ustat":
        phi = mlp_init((k, h, 1), src.fork(0), "tanh", "identity")
        rho = mlp_init((nd + 1, 1), src.fork(1), "identity", "identity") if nd else None
    else:
        phi = mlp_init((1, h, h), src.fork(0), "tanh", "tanh")
        rho = mlp_init((nd + h, h, 1), src.fork(1), "tanh", "identity")
    if rho is None:
        return LayerStack([SetLayerParams(phi=phi, rho=None, pooling="ustat", k=k)])
    return LayerStack([SetLayerParams(phi=phi, rho=rho, pooling=cfg["pooling"], k=k, noise_dims=nd)])


def run_train(config: dict, seed: Optional[int] = None) -> dict:
    validate(config, "train_config")
    cfg = dict(TRAIN_DEFAULTS, **config)
    if seed is not None:
        cfg["seed"] = seed
    root = NoiseSource(cfg["seed"])
    start = time.perf_counter()
    if cfg["task"] == "matrix":
        shape = tuple(cfg["matrix_shape"])
        thetas = (0.5, 1.0, -0.25, 0.25, 0.05)
        x, y = matrix_dataset(cfg["n_train"], shape, thetas, root.fork(0))
        xt, yt = matrix_dataset(cfg["n_test"], shape, thetas, root.fork(1))
        params, trace = fit_matrix_layer(x, y, cfg["epochs"], cfg["lr"], cfg["seed"], cfg["batch_size"])
        theta = np.array(params.thetas)
        train_mse = float(np.mean((matrix_features(x) @ theta - y) ** 2))
        test_mse = float(np.mean((matrix_features(xt) @ theta - yt) ** 2))
        spec = GroupSpec.separate(*shape)
        audit = check_equivariance_exhaustive(lambda m: exch_matrix_layer(params, m), xt[0], spec, 1e-9,
                                              name="trained_equivariance")
        model = {"matrix_thetas": list(params.thetas)}
    else:
        stack = build_set_stack(cfg, root.fork(2))
        x, y = set_dataset(cfg["task"], cfg["n_train"], cfg["set_size"], root.fork(0))
        xt, yt = set_dataset(cfg["task"], cfg["n_test"], cfg["set_size"], root.fork(1))
        result = sgd_train(stack, x, y, cfg["epochs"], cfg["lr"], cfg["seed"], cfg["batch_size"])
        trace = result.loss_trace
        eval_src = root.fork(3)
        train_mse = evaluate_mse(result.stack, x, y, eval_src)
        test_mse = evaluate_mse(result.stack, xt, yt, eval_src)
        n = cfg["set_size"]
        audit_src = root.fork(4)
        audit = check_invariance_exhaustive(lambda s: stack_forward(result.stack, s, src=audit_src), xt[0],
                                            GroupSpec.seq(n), 1e-9, name="trained_invariance",
                                            limit=40320)
        model = stack_to_dict(result.stack)
    seconds = time.perf_counter() - start
    if not np.isfinite(test_mse):
        raise TrainingDivergedError(f"test loss is {test_mse}")
    return {"schema_version": SCHEMA_VERSION, "kind": "train_metrics", "seed": cfg["seed"], "task": cfg["task"],
            "epochs": cfg["epochs"], "train_mse": train_mse, "test_mse": test_mse,
            "loss_trace": [float(v) for v in trace], "seconds": seconds,
            "invariance_audit": audit.to_dict(), "model": model}


def cmd_train(args) -> int:
    config = _read_json(args.config)
    if isinstance(config, dict) and "seed" not in config and args.seed is not None:
        config = dict(config, seed=args.seed)
    doc = run_train(config, args.seed)
    if "model_path" in config:
        with open(config["model_path"], "w") as fh:
            fh.write(dumps(doc["model"]) + "\n")
    _emit(doc, "train_metrics", args.out)
    return EXIT_OK if doc["invariance_audit"]["passed"] else EXIT_FAIL


def cmd_report(args) -> int:
    """Validate check reports and print a summary."""
    total, failed, files = 0, [], []
    for path in args.inputs:
        doc = _read_json(path)
        validate(doc, "check_report")
        files.append(path)
        for r in doc["reports"]:
            total += 1
            if not r["passed"]:
                failed.append(f"{path}:{r['name']}")
    summary = {"schema_version": SCHEMA_VERSION, "files": files, "reports": total, "failed": failed,
               "passed": not failed}
    text = dumps(summary)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if not failed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    common.add_argument("--tol", type=float, default=None, help="relative tolerance for exhaustive checks")
    common.add_argument("--bitexact", action="store_true", help="pool in canonical order; exact comparisons")
    common.add_argument("--out", default=None, help="write JSON here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="exchsym", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", parents=[common], help="canonical form of an array")
    p.add_argument("input", help="JSON file with a nested array (or '-' for stdin)")
    p.add_argument("--group", choices=["seq", "separate", "joint"], default=None)
    p.add_argument("--directed", action="store_true", help="joint relabelling without the symmetry requirement")
    p.add_argument("--method", choices=["pruned", "brute"], default="pruned")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("sample", parents=[common], help="draw from the orbit law of an array")
    p.add_argument("input")
    p.add_argument("--group", choices=["seq", "separate", "joint"], default=None)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("check", parents=[common], help="run named verification suites")
    p.add_argument("config", help="check config JSON")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("train", parents=[common], help="train a toy model")
    p.add_argument("config", help="train config JSON")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("report", parents=[common], help="validate and summarise check reports")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except GroupSizeError as e:
        log.error("feasibility limit: %s", e)
        return EXIT_FEASIBILITY
    except (InputError, ShapeError, SymmetryError, KeyError) as e:
        log.error("input error: %s", e)
        return EXIT_INPUT
    except TrainingDivergedError as e:
        log.error("training diverged: %s", e)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
