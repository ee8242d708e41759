"""Configuration-driven runner and command-line entry point.

Usage::

    releq strata  --config run.json
    releq solve   --config run.json --seed 1
    releq analyze --config run.json --out report.json
    releq generic --config run.json --quiet
    releq run     --config run.json        # every task in the config, in order

The config is a JSON document validated against :data:`CONFIG_SCHEMA`.
Unknown keys are errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import __version__
from .commuting import classify_pair, stratified_samples, stratum_info, stratum_tangent
from .lie import build_algebra
from .solver import (
    ConvergenceError,
    RelativeEquilibrium,
    SolveOptions,
    group_classes,
    manifold_dim,
    multistart,
    residual_tolerance,
    solve_re,
)
from .systems import CotangentGroupSystem, build_system, make_cotangent_group_system
from .tolerances import Tolerances
from .transversality import (
    check_transversal_direct,
    check_transversal_normalform,
    necessary_inequality,
    normal_form_blocks,
    singularity_model,
    symplecticity_check,
    tangent_space_E,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_TASK_FAILURE, EXIT_CONFIG_ERROR = 0, 1, 2

_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "algebra": {"type": "string"},
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["preset"],
            "properties": {
                "preset": {"enum": ["rigid_body", "rigid_body_rotors", "torus", "cotangent_group"]},
                "moments": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                            "minItems": 3, "maxItems": 3},
                "seed": {"type": "integer"},
                "coupling": {"type": "number"},
                "inertia": {"type": "number", "exclusiveMinimum": 0},
                "algebra": {"type": "string"},
                "M": _MATRIX,
            },
        },
        "tasks": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["type"],
                "properties": {
                    "type": {"enum": ["strata", "solve", "analyze", "genericity"]},
                    "n": {"type": "integer", "minimum": 1},
                    "seed": {"type": "integer"},
                    "multistart": {"type": "integer", "minimum": 1},
                    "include_origin": {"type": "boolean"},
                    "scale": {"type": "number", "minimum": 0},
                    "trials": {"type": "integer", "minimum": 1},
                },
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {name: {"type": "number", "exclusiveMinimum": 0}
                           for name in ("alg", "sub", "rank", "pair", "sys", "re", "nf")},
        },
        "seed": {"type": "integer"},
        "output": {"type": "string"},
    },
}

TASK_DEFAULTS = {
    "strata": {"n": 1000, "seed": 0},
    "solve": {"multistart": 100, "seed": 0},
    "analyze": {"multistart": 100, "seed": 0, "include_origin": False},
    "genericity": {"scale": 0.05, "trials": 100, "seed": 0, "multistart": 20, "include_origin": False},
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# serialization

def _format(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite number {x!r} in report")
        s = format(x, ".17g")
        if "e" not in s and "." not in s:
            s += ".0"
        return s
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _format(obj.tolist(), indent, level)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_format(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _format(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k)) + ": " + _format(obj[k], indent, level + 1) for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and floats written to 17 significant digits."""
    return _format(obj, indent, 0) + "\n"


# ---------------------------------------------------------------------------
# records

def _fp(fp) -> list:
    return list(fp.as_tuple())


def re_record(sys: CotangentGroupSystem, re: RelativeEquilibrium, tol: Tolerances, full: bool = True) -> dict:
    bound = residual_tolerance(sys, re.point, tol.re)
    if not re.residual_norm < bound:
        raise ArithmeticError(f"RE residual {re.residual_norm:.3e} exceeds {bound:.3e}")
    rec = {
        "mu_body": re.point.mu_b,
        "momentum": re.momentum,
        "generator": re.generator,
        "fingerprint": _fp(re.fingerprint),
        "residual": re.residual_norm,
        "iterations": re.iterations,
    }
    if not full:
        return rec
    direct = check_transversal_direct(sys, re, tol.rank)
    blocks = normal_form_blocks(sys, re)
    nf = check_transversal_normalform(blocks, re.fingerprint, tol.rank)
    info = stratum_info(sys.algebra, re.fingerprint)
    rec.update({
        "direct": {"transversal": direct.transversal, "margin": direct.margin,
                   "max_principal_angle": direct.max_principal_angle},
        "normal_form": {"transversal": nf.transversal, "semisimple_zero": nf.semisimple_zero,
                        "nondegenerate": nf.nondegenerate, "C_onto_kernel": nf.C_onto_kernel,
                        "k_spanned": nf.k_spanned, "Dbar_surjective": nf.Dbar_surjective},
        "verdicts_agree": direct.transversal == nf.transversal,
        "necessary_inequality": necessary_inequality(re.fingerprint),
        "stratum": {"dim_stratum": info.dim_stratum, "dim_quotient": info.dim_quotient},
        "frame_dims": list(blocks.frame.dims),
        "block_residuals": {k: v for k, v in blocks.residuals.items()},
        "singularity": singularity_model(re.fingerprint).descriptor,
    })
    if direct.transversal:
        T = tangent_space_E(sys, re, blocks, check=False)
        sym = symplecticity_check(sys, re, blocks, tol.rank)
        rec.update({
            "tangent_dim": T.dim,
            "manifold_dim": manifold_dim(sys, re, require_transversal=False),
            "expected_dim": sys.algebra.dim + info.dim_quotient,
            "symplecticity": {"measured_rank": sym.measured_rank, "dim": sym.dim,
                              "is_symplectic": sym.is_symplectic, "predicted": sym.predicted},
        })
    return rec


# ---------------------------------------------------------------------------
# tasks

def run_strata(g, params: dict, tol: Tolerances) -> dict:
    pairs = stratified_samples(g, params["n"], params["seed"])
    table: dict = {}
    violations = 0
    for pair in pairs:
        fp = classify_pair(pair, tol.pair)
        info = stratum_info(g, fp)
        row = table.setdefault(fp.as_tuple(), {"fingerprint": _fp(fp), "count": 0,
                                               "dim_stratum": info.dim_stratum,
                                               "dim_quotient": info.dim_quotient,
                                               "transversal_possible": info.transversal_possible})
        row["count"] += 1
        if stratum_tangent(pair, tol.pair).dim != info.dim_stratum:
            violations += 1
    return {"type": "strata", "algebra": g.name, "rank": g.rank, "n_samples": len(pairs),
            "dimension_violations": violations, "strata": [table[k] for k in sorted(table)]}


def _solve_classes(sys, params, tol, full):
    opts = SolveOptions(tol=tol.re)
    found, failures = multistart(sys, params["multistart"], params["seed"], opts)
    if params.get("include_origin"):
        try:
            found.append(solve_re(sys, sys.point(np.zeros(sys.algebra.dim)), np.zeros(sys.algebra.dim), opts))
        except ConvergenceError:
            failures += 1
    if not found:
        raise ConvergenceError(f"all {failures} starts failed to converge")
    classes = group_classes(found)
    out = []
    for key, members in classes.items():
        rep = members[0]
        rec = re_record(sys, rep, tol, full)
        rec["class_size"] = len(members)
        rec["direction"] = list(key[1])
        out.append(rec)
    return out, len(found), failures


def run_solve(sys, params, tol) -> dict:
    classes, n_found, failures = _solve_classes(sys, params, tol, full=False)
    return {"type": "solve", "system": sys.name, "n_starts": params["multistart"], "n_solved": n_found,
            "n_failed": failures, "n_classes": len(classes), "classes": classes}


def run_analyze(sys, params, tol) -> dict:
    classes, n_found, failures = _solve_classes(sys, params, tol, full=True)
    return {"type": "analyze", "system": sys.name, "n_starts": params["multistart"], "n_solved": n_found,
            "n_failed": failures, "n_classes": len(classes), "classes": classes}


def repair_positive_definite(M: np.ndarray, floor: float) -> tuple[np.ndarray, bool]:
    """Clip eigenvalues of the symmetric part at ``floor``."""
    S = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(S)
    if w.min() >= floor:
        return S, False
    return (V * np.maximum(w, floor)) @ V.T, True


@dataclass
class GenericitySummary:
    fractions: list = field(default_factory=list)
    n_re: list = field(default_factory=list)
    skipped: int = 0
    repaired: int = 0
    failed_starts: int = 0

    @property
    def aggregate(self) -> float:
        total = sum(self.n_re)
        if total == 0:
            return 0.0
        return float(sum(f * n for f, n in zip(self.fractions, self.n_re)) / total)


def genericity_experiment(sys: CotangentGroupSystem, scale: float, trials: int, seed: int,
                          multistart_n: int = 20, include_origin: bool = False,
                          tol: Tolerances | None = None) -> GenericitySummary:
    """Perturb M, re-solve, and record the transversal fraction per trial.

    Only nonzero-momentum REs are counted unless ``include_origin`` is set, in
    which case the zero-momentum equilibrium is added to each trial.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    tol = tol or Tolerances()
    opts = SolveOptions(tol=tol.re)
    rng = np.random.default_rng(seed)
    start_seed = int(rng.integers(2**31))
    M0 = sys.M
    w0 = np.linalg.eigvalsh(M0)
    floor = 1e-3 * w0.min()
    summary = GenericitySummary()
    for _ in range(trials):
        N = rng.standard_normal(M0.shape)
        M = M0 + scale * 0.5 * (N + N.T)
        M, repaired = repair_positive_definite(M, floor)
        if not np.isfinite(M).all() or np.linalg.cond(M) > 1e8:
            summary.skipped += 1
            continue
        summary.repaired += int(repaired)
        trial_sys = make_cotangent_group_system(sys.algebra, M, sys.name, sys.params)
        found, failures = multistart(trial_sys, multistart_n, start_seed, opts)
        summary.failed_starts += failures
        res = [re for re in found if np.linalg.norm(re.momentum) > 0]
        if include_origin:
            zero = np.zeros(sys.algebra.dim)
            res.append(solve_re(trial_sys, trial_sys.point(zero), zero, opts))
        verdicts = [check_transversal_direct(trial_sys, re, tol.rank).transversal for re in res]
        summary.n_re.append(len(verdicts))
        summary.fractions.append(float(np.mean(verdicts)) if verdicts else 0.0)
    return summary


def run_genericity(sys, params, tol) -> dict:
    s = genericity_experiment(sys, params["scale"], params["trials"], params["seed"],
                              params["multistart"], params["include_origin"], tol)
    return {"type": "genericity", "system": sys.name, "scale": params["scale"], "trials": params["trials"],
            "fractions": s.fractions, "n_re": s.n_re, "aggregate_fraction": s.aggregate,
            "skipped": s.skipped, "repaired": s.repaired, "failed_starts": s.failed_starts}


# ---------------------------------------------------------------------------
# driver

def validate_config(config: dict) -> dict:
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config: {exc.message} at {list(exc.absolute_path)}") from exc
    needs_system = any(t["type"] in ("solve", "analyze", "genericity") for t in config.get("tasks", []))
    needs_algebra = any(t["type"] == "strata" for t in config.get("tasks", []))
    if needs_system and "system" not in config:
        raise ConfigError("config: solve/analyze/genericity tasks need a 'system'")
    if needs_algebra and "algebra" not in config and "system" not in config:
        raise ConfigError("config: strata tasks need an 'algebra' (or a system)")
    return config


def _task_params(task: dict, seed_override: int | None, default_seed: int | None = None) -> dict:
    params = dict(TASK_DEFAULTS[task["type"]])
    if default_seed is not None:
        params["seed"] = default_seed
    params.update({k: v for k, v in task.items() if k != "type"})
    if seed_override is not None:
        params["seed"] = seed_override
    return params


RUNNERS = {"solve": run_solve, "analyze": run_analyze, "genericity": run_genericity}


def run(config: dict, seed: int | None = None) -> tuple[dict, int]:
    """Execute the config's tasks in order; returns (report, exit code)."""
    validate_config(config)
    tol = Tolerances(**config.get("tolerances", {}))
    report = {"schema_version": SCHEMA_VERSION, "tool_version": __version__, "config": config, "tasks": []}
    system = algebra = None
    try:
        if "system" in config:
            system = build_system(config["system"])
        if "algebra" in config:
            algebra = build_algebra(config["algebra"])
        elif system is not None:
            algebra = system.algebra
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"config: {exc}") from exc
    for index, task in enumerate(config.get("tasks", [])):
        params = _task_params(task, seed, config.get("seed"))
        try:
            if task["type"] == "strata":
                rec = run_strata(algebra, params, tol)
            else:
                rec = RUNNERS[task["type"]](system, params, tol)
        except Exception as exc:  # partial report with diagnostic
            report["tasks"].append({"type": task["type"], "index": index, "error": f"{type(exc).__name__}: {exc}"})
            return report, EXIT_TASK_FAILURE
        rec["index"] = index
        rec["params"] = params
        report["tasks"].append(rec)
    return report, EXIT_OK


def summarize(report: dict) -> str:
    lines = [f"releq {report['tool_version']} (schema {report['schema_version']})"]
    for t in report["tasks"]:
        if "error" in t:
            lines.append(f"[{t['index']}] {t['type']}: FAILED {t['error']}")
        elif t["type"] == "strata":
            lines.append(f"[{t['index']}] strata of {t['algebra']}: {t['n_samples']} samples, "
                         f"{t['dimension_violations']} dimension violations")
            for row in t["strata"]:
                lines.append(f"    fp {tuple(row['fingerprint'])}  count {row['count']:5d}  "
                             f"dim {row['dim_stratum']}  quotient {row['dim_quotient']}")
        elif t["type"] in ("solve", "analyze"):
            lines.append(f"[{t['index']}] {t['type']} {t['system']}: {t['n_solved']}/{t['n_starts']} solved, "
                         f"{t['n_classes']} classes")
            for c in t["classes"]:
                line = f"    fp {tuple(c['fingerprint'])}  size {c['class_size']}"
                if "direct" in c:
                    line += (f"  transversal {c['direct']['transversal']}/{c['normal_form']['transversal']}"
                             f"  margin {c['direct']['margin']:.3g}")
                    if "tangent_dim" in c:
                        line += f"  dim E {c['tangent_dim']}  symplectic {c['symplecticity']['is_symplectic']}"
                lines.append(line)
        elif t["type"] == "genericity":
            lines.append(f"[{t['index']}] genericity {t['system']}: scale {t['scale']}, {t['trials']} trials, "
                         f"aggregate transversal fraction {t['aggregate_fraction']:.6g}")
    return "\n".join(lines)


def _load(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="releq", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=["strata", "solve", "analyze", "generic", "run"])
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="override every task seed")
    parser.add_argument("--out", help="write the JSON report here (default: config 'output' or stdout)")
    parser.add_argument("--quiet", action="store_true", help="suppress the text summary")
    args = parser.parse_args(argv)
    try:
        config = _load(args.config)
        if args.command != "run":
            kind = "genericity" if args.command == "generic" else args.command
            tasks = [t for t in config.get("tasks", []) if t.get("type") == kind] or [{"type": kind}]
            config = {**config, "tasks": tasks}
        report, code = run(config, args.seed)
    except ConfigError as exc:
        print(str(exc), file=_sys.stderr)
        return EXIT_CONFIG_ERROR
    text = dumps(report)
    out = args.out or config.get("output")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif args.quiet:
        _sys.stdout.write(text)
    if not args.quiet:
        print(summarize(report))
    return code
