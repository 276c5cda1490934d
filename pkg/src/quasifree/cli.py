"""Config-driven command line front end.

One JSON config file describes a model, tolerance overrides, and a list of
tasks; each subcommand runs the tasks of its own type (synthesizing a
default one when the config lists none) and writes a JSON report, plus one
CSV per numeric series when ``--format csv`` is selected.

Reports are deterministic: re-running the same config and seed reproduces
every numeric field byte for byte. Wall-clock timings are the one moving
part, kept in their own ``timings`` block so they are easy to strip.

Exit codes: 0 on success, 1 when any task records an error, 2 on a config
problem (including unknown keys, which are rejected with a path).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .ed import MAX_SITES, ed_build, ed_ground, ed_expectation
from .exceptions import ConfigError, QuasifreeError, SplitNotConvergedError
from .monomials import FermionMonomial, Kind
from .observables import (
    SPLIT_CONV_TOL,
    STRING_ETA,
    STRING_TAIL_TOL,
    WEDGE_TOL,
    StringCorrelatorSpec,
    _default_split_windows,
    default_string_pair,
    detect_string_order,
    split_defect,
    string_correlator,
    wick_expectation,
    z2_index,
)
from .quadratic import (
    MODEL_NAMES,
    ZERO_MODE_RTOL,
    QuadraticHamiltonian,
    SelfDualCut,
    build_model,
    ground_state,
    model_params,
    one_particle_spectrum,
)

__all__ = [
    "RunConfig",
    "Report",
    "load_config",
    "validate_config",
    "run",
    "emit",
    "main",
]

_TASK_TYPES = ("spectrum", "string-order", "z2-index", "split", "oracle", "sweep")

_TOLERANCE_DEFAULTS = {
    "eta": STRING_ETA,
    "tail_tol": STRING_TAIL_TOL,
    "wedge_tol": WEDGE_TOL,
    "conv_tol": SPLIT_CONV_TOL,
    "zero_mode_rtol": ZERO_MODE_RTOL,
}

_ORACLE_TOL = 1e-10


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated, fully defaulted run description."""

    schema: int
    seed: int
    model: dict
    tolerances: dict
    tasks: tuple
    output: dict


@dataclasses.dataclass(frozen=True)
class Report:
    config: dict
    results: list
    version: str
    timings: dict


# ---------------------------------------------------------------------------
# Config loading and validation


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    return data


def _reject_unknown(d: dict, allowed, where: str):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key {extra[0]!r} at {where}")


def _require_int(v, where: str, minimum=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where} must be >= {minimum}, got {v}")
    return v


def _require_number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number, got {v!r}")
    return float(v)


def _validate_model(m, where="model") -> dict:
    if not isinstance(m, dict):
        raise ConfigError(f"{where} must be an object")
    _reject_unknown(m, ("name", "L", "params", "boundary"), where)
    name = m.get("name")
    if name not in MODEL_NAMES:
        raise ConfigError(f"{where}.name must be one of {MODEL_NAMES}, got {name!r}")
    L = _require_int(m.get("L"), f"{where}.L", minimum=1)
    boundary = m.get("boundary", "open")
    if boundary not in ("open", "ring"):
        raise ConfigError(f"{where}.boundary must be 'open' or 'ring', got {boundary!r}")
    raw = m.get("params", {})
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}.params must be an object")
    params = {}
    for k, v in raw.items():
        if name == "custom" and k in ("A", "B"):
            params[k] = v  # matrices; build_model validates shapes
        else:
            params[k] = _require_number(v, f"{where}.params.{k}")
    try:
        params = model_params(name, params)
    except QuasifreeError as e:
        raise ConfigError(f"{where}.params: {e}") from e
    return {"name": name, "L": L, "params": params, "boundary": boundary}


def _validate_task(t, model: dict, where: str, allow_sweep=True) -> dict:
    if not isinstance(t, dict):
        raise ConfigError(f"{where} must be an object")
    typ = t.get("type")
    if typ not in _TASK_TYPES:
        raise ConfigError(f"{where}.type must be one of {_TASK_TYPES}, got {typ!r}")
    if typ == "sweep" and not allow_sweep:
        raise ConfigError(f"{where}: sweep tasks cannot nest")
    L = model["L"]
    out = {"type": typ}

    if typ == "spectrum":
        _reject_unknown(t, ("type",), where)

    elif typ == "string-order":
        _reject_unknown(t, ("type", "k_max", "offset"), where)
        out["k_max"] = _require_int(t.get("k_max", 40), f"{where}.k_max", minimum=1)
        out["offset"] = _require_int(t.get("offset", -(L // 4)), f"{where}.offset")

    elif typ == "z2-index":
        _reject_unknown(t, ("type", "cut", "offset", "windows"), where)
        out["offset"] = _require_int(t.get("offset", -(L // 2)), f"{where}.offset")
        out["cut"] = _require_int(t.get("cut", 0), f"{where}.cut")
        out["windows"] = _validate_windows(t.get("windows"), where)

    elif typ == "split":
        _reject_unknown(t, ("type", "cut", "offset", "windows"), where)
        out["offset"] = _require_int(t.get("offset", 0), f"{where}.offset")
        out["cut"] = _require_int(t.get("cut", out["offset"] + L // 2), f"{where}.cut")
        out["windows"] = _validate_windows(t.get("windows"), where)

    elif typ == "oracle":
        _reject_unknown(t, ("type", "L", "instances", "samples"), where)
        out["L"] = _require_int(t.get("L", 8), f"{where}.L", minimum=2)
        if out["L"] > MAX_SITES:
            raise ConfigError(f"{where}.L must be <= {MAX_SITES}, got {out['L']}")
        out["instances"] = _require_int(t.get("instances", 5), f"{where}.instances", minimum=1)
        out["samples"] = _require_int(t.get("samples", 40), f"{where}.samples", minimum=1)

    else:  # sweep
        _reject_unknown(t, ("type", "parameter", "values", "task"), where)
        par = t.get("parameter")
        if par not in model["params"]:
            raise ConfigError(
                f"{where}.parameter must name a {model['name']!r} parameter, got {par!r}"
            )
        values = t.get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{where}.values must be a nonempty array")
        out["parameter"] = par
        out["values"] = [
            _require_number(v, f"{where}.values[{i}]") for i, v in enumerate(values)
        ]
        inner = t.get("task")
        if inner is None:
            raise ConfigError(f"{where}.task is required")
        out["task"] = _validate_task(inner, model, f"{where}.task", allow_sweep=False)

    return out


def _validate_windows(value, where: str):
    if value is None:
        return None
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}.windows must be a nonempty array")
    return [_require_int(w, f"{where}.windows[{i}]", minimum=1) for i, w in enumerate(value)]


def validate_config(data: dict) -> RunConfig:
    """Check every key, fill defaults, and reject anything unrecognized."""
    _reject_unknown(
        data, ("schema", "seed", "model", "tolerances", "tasks", "output"), "top level"
    )
    if data.get("schema") != 1:
        raise ConfigError(f"schema must be 1, got {data.get('schema')!r}")
    seed = _require_int(data.get("seed", 0), "seed", minimum=0)
    if "model" not in data:
        raise ConfigError("missing key 'model' at top level")
    model = _validate_model(data["model"])

    tol_raw = data.get("tolerances", {})
    if not isinstance(tol_raw, dict):
        raise ConfigError("tolerances must be an object")
    _reject_unknown(tol_raw, _TOLERANCE_DEFAULTS, "tolerances")
    tolerances = dict(_TOLERANCE_DEFAULTS)
    for k, v in tol_raw.items():
        fv = _require_number(v, f"tolerances.{k}")
        if fv <= 0:
            raise ConfigError(f"tolerances.{k} must be positive, got {v}")
        tolerances[k] = fv

    tasks_raw = data.get("tasks", [])
    if not isinstance(tasks_raw, list):
        raise ConfigError("tasks must be an array")
    tasks = tuple(
        _validate_task(t, model, f"tasks[{i}]") for i, t in enumerate(tasks_raw)
    )

    out_raw = data.get("output", {})
    if not isinstance(out_raw, dict):
        raise ConfigError("output must be an object")
    _reject_unknown(out_raw, ("dir", "format"), "output")
    fmt = out_raw.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"output.format must be 'json' or 'csv', got {fmt!r}")
    out_dir = out_raw.get("dir", "reports")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("output.dir must be a nonempty string")
    output = {"dir": out_dir, "format": fmt}

    return RunConfig(
        schema=1, seed=seed, model=model, tolerances=tolerances, tasks=tasks, output=output
    )


def _select_tasks(cfg: RunConfig, command: str) -> RunConfig:
    """Keep the subcommand's tasks, or synthesize the default one."""
    picked = tuple(t for t in cfg.tasks if t["type"] == command)
    if not picked:
        if command == "sweep":
            raise ConfigError("config has no sweep task and none can be synthesized")
        picked = (_validate_task({"type": command}, cfg.model, "tasks[default]"),)
    return dataclasses.replace(cfg, tasks=picked)


# ---------------------------------------------------------------------------
# Task runners


def _build(model: dict) -> QuadraticHamiltonian:
    return build_model(model["name"], model["L"], model["params"], model["boundary"])


def _ground(model: dict, tol: dict, offset: int = 0):
    h = _build(model)
    return h, ground_state(h, site_offset=offset, zero_mode_rtol=tol["zero_mode_rtol"])


def _ring_twin(model: dict):
    """Translation-invariant twin for the Bloch estimator, when one exists."""
    if model["name"] == "custom" or model["L"] % 2 or model["L"] < 3:
        return None
    if model["boundary"] == "ring":
        return _build(model)
    return build_model(model["name"], model["L"], model["params"], "ring")


def _run_spectrum(cfg: RunConfig, task: dict, rng) -> dict:
    h, gs = _ground(cfg.model, cfg.tolerances)
    eps = one_particle_spectrum(h)
    return {
        "energy": gs.energy,
        "gap": gs.gap,
        "edge_pair_filled": gs.edge_pair_filled,
        "epsilons": [float(e) for e in eps],
    }


def _run_string_order(cfg: RunConfig, task: dict, rng) -> dict:
    _, gs = _ground(cfg.model, cfg.tolerances, offset=task["offset"])
    q1, q2 = default_string_pair()
    spec = StringCorrelatorSpec(q1, q2, tuple(range(1, task["k_max"] + 1)))
    series = string_correlator(gs.covariance, spec)
    result = {
        "series": [[k, v] for k, v in series],
        "eta": cfg.tolerances["eta"],
        "tail_tol": cfg.tolerances["tail_tol"],
    }
    if len(series) >= 20:
        verdict = detect_string_order(
            series, eta=cfg.tolerances["eta"], tail_tol=cfg.tolerances["tail_tol"]
        )
        result.update(
            detected=verdict.detected,
            estimate=verdict.estimate,
            period_hint=verdict.period_hint,
        )
    return result


def _run_z2_index(cfg: RunConfig, task: dict, rng) -> dict:
    _, gs = _ground(cfg.model, cfg.tolerances, offset=task["offset"])
    res = z2_index(
        gs.covariance,
        SelfDualCut(task["cut"]),
        _ring_twin(cfg.model),
        split_windows=task["windows"],
        wedge_tol=cfg.tolerances["wedge_tol"],
        conv_tol=cfg.tolerances["conv_tol"],
    )
    return {
        "index": res.index,
        "dim_wedge": res.dim_wedge,
        "estimators": dict(res.estimator_values),
        "agreement": res.agreement,
        "diagnostics": list(res.diagnostics),
        "wedge_tol": cfg.tolerances["wedge_tol"],
    }


def _run_split(cfg: RunConfig, task: dict, rng) -> dict:
    _, gs = _ground(cfg.model, cfg.tolerances, offset=task["offset"])
    lo, hi = gs.covariance.site_range()
    windows = task["windows"]
    if windows is None:
        windows = _default_split_windows(min(task["cut"] - lo, hi - task["cut"]))
    series = split_defect(
        gs.covariance,
        SelfDualCut(task["cut"]),
        windows,
        conv_tol=cfg.tolerances["conv_tol"],
    )
    return {
        "windows": list(series.windows),
        "hs_norms": list(series.hs_norms),
        "verdict": series.verdict,
        "conv_tol": cfg.tolerances["conv_tol"],
    }


def _random_even_word(rng, L: int) -> FermionMonomial:
    half = int(rng.integers(1, 4))
    idx = np.sort(rng.choice(2 * L, size=2 * half, replace=False))
    factors = tuple(
        (int(p) // 2, Kind.MAJ_ODD if p % 2 else Kind.MAJ_EVEN) for p in idx
    )
    return FermionMonomial(1.0 + 0.0j, factors)


def _run_oracle(cfg: RunConfig, task: dict, rng) -> dict:
    """Cross-check Wick expectations against exact diagonalization.

    Random dense quadratic instances; a mismatch beyond 1e-10 is a real
    defect somewhere in the pipeline, so it fails the task rather than
    being quietly reported.
    """
    L = task["L"]
    max_err = 0.0
    max_energy_err = 0.0
    for _ in range(task["instances"]):
        a = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        b = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        h = QuadraticHamiltonian(0.5 * (a + a.conj().T), 0.5 * (b - b.T))
        gs = ground_state(h, zero_mode_rtol=cfg.tolerances["zero_mode_rtol"])
        ed_state = ed_ground(ed_build(h))
        max_energy_err = max(max_energy_err, abs(gs.energy - ed_state.energy))
        for _ in range(task["samples"]):
            m = _random_even_word(rng, L)
            diff = abs(
                wick_expectation(gs.covariance, m) - ed_expectation(ed_state, m)
            )
            max_err = max(max_err, diff)
    if max_err > _ORACLE_TOL or max_energy_err > _ORACLE_TOL:
        raise QuasifreeError(
            f"oracle cross-check failed: expectation error {max_err:.3e}, "
            f"energy error {max_energy_err:.3e} (tolerance {_ORACLE_TOL:.0e})"
        )
    return {
        "L": L,
        "instances": task["instances"],
        "samples": task["samples"],
        "max_expectation_error": max_err,
        "max_energy_error": max_energy_err,
        "tolerance": _ORACLE_TOL,
    }


def _run_sweep(cfg: RunConfig, task: dict, rng, threads: int = 1) -> dict:
    inner = task["task"]
    runner = _RUNNERS[inner["type"]]

    def one_point(value):
        params = dict(cfg.model["params"])
        params[task["parameter"]] = value
        point_cfg = dataclasses.replace(cfg, model={**cfg.model, "params": params})
        record = {"value": value}
        try:
            record["result"] = runner(point_cfg, inner, rng)
        except QuasifreeError as e:
            record["error"] = _error_record(e)
        return record

    values = task["values"]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(one_point, values))  # map keeps input order
    else:
        points = [one_point(v) for v in values]
    return {"parameter": task["parameter"], "points": points}


_RUNNERS = {
    "spectrum": _run_spectrum,
    "string-order": _run_string_order,
    "z2-index": _run_z2_index,
    "split": _run_split,
    "oracle": _run_oracle,
}


def _error_record(e: QuasifreeError) -> dict:
    rec = {"kind": type(e).__name__, "message": str(e)}
    if isinstance(e, SplitNotConvergedError) and e.series is not None:
        rec["split"] = {
            "windows": list(e.series.windows),
            "hs_norms": list(e.series.hs_norms),
            "verdict": e.series.verdict,
        }
    return rec


def run(cfg: RunConfig, *, threads: int = 1) -> Report:
    """Execute every task; exceptions become per-task error records."""
    results = []
    timings = {}
    for i, task in enumerate(cfg.tasks):
        label = f"task-{i:02d}"
        start = time.perf_counter()
        record = {"index": i, "type": task["type"]}
        # per-task stream, independent of execution order and thread count
        rng = np.random.default_rng([cfg.seed, i])
        try:
            if task["type"] == "sweep":
                record["result"] = _run_sweep(cfg, task, rng, threads=threads)
                failed = [p["value"] for p in record["result"]["points"] if "error" in p]
                if failed:
                    record["error"] = {
                        "kind": "SweepPointFailure",
                        "message": f"{len(failed)} sweep point(s) failed: {failed}",
                    }
            else:
                record["result"] = _RUNNERS[task["type"]](cfg, task, rng)
        except QuasifreeError as e:
            record["error"] = _error_record(e)
        timings[label] = time.perf_counter() - start
        results.append(record)
    config_echo = {
        "schema": cfg.schema,
        "seed": cfg.seed,
        "model": _plain(cfg.model),
        "tolerances": dict(cfg.tolerances),
        "tasks": _plain(list(cfg.tasks)),
        "output": dict(cfg.output),
    }
    return Report(
        config=config_echo, results=results, version=__version__, timings=timings
    )


# ---------------------------------------------------------------------------
# Deterministic serialization


def _plain(obj):
    """Recursively convert to JSON-ready builtins."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise QuasifreeError(f"non-finite value {x!r} in report")
    return format(float(x), ".17g")


def _dumps(obj, indent: int = 0) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [
            f'{pad}  {json.dumps(str(k), ensure_ascii=False)}: {_dumps(obj[k], indent + 1)}'
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{pad}  {_dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    raise QuasifreeError(f"cannot serialize {type(obj).__name__} in a report")


def _write_text(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                _format_float(v) if isinstance(v, float) else str(int(v)) for v in row
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def _series_of(result: dict):
    """(header, rows) for each numeric series a task result carries."""
    if "series" in result:
        yield "correlator", ("k", "value"), [
            (int(k), float(v)) for k, v in result["series"]
        ]
    if "hs_norms" in result:
        yield "split", ("window", "hs_norm"), list(
            zip((int(w) for w in result["windows"]), (float(v) for v in result["hs_norms"]))
        )
    if "epsilons" in result:
        yield "spectrum", ("mode", "epsilon"), [
            (i, float(e)) for i, e in enumerate(result["epsilons"])
        ]


def emit(report: Report, out_dir, fmt: str = "json") -> list:
    """Write report.json (and per-series CSVs for fmt='csv'); return paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": report.config,
        "results": _plain(report.results),
        "version": report.version,
        "timings": report.timings,
    }
    paths = [out / "report.json"]
    _write_text(paths[0], _dumps(payload) + "\n")
    if fmt == "csv":
        for rec in report.results:
            base = f"task-{rec['index']:02d}"
            result = rec.get("result")
            if not isinstance(result, dict):
                continue
            for name, header, rows in _series_of(result):
                p = out / f"{base}-{name}.csv"
                _write_csv(p, header, rows)
                paths.append(p)
            for j, point in enumerate(result.get("points", [])):
                inner = point.get("result")
                if not isinstance(inner, dict):
                    continue
                for name, header, rows in _series_of(inner):
                    p = out / f"{base}-point-{j:02d}-{name}.csv"
                    _write_csv(p, header, rows)
                    paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# Entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasifree",
        description="Quasi-free chain reports: spectra, string order, split defect, Z2 index.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _TASK_TYPES:
        p = sub.add_parser(name, help=f"run the config's {name} task(s)")
        p.add_argument("--config", required=True, metavar="PATH", help="JSON config file")
        p.add_argument("--out", metavar="DIR", help="output directory (default from config)")
        p.add_argument("--format", choices=("json", "csv"), help="report format override")
        p.add_argument("--seed", type=int, metavar="N", help="seed override")
        p.add_argument("--threads", type=int, default=1, metavar="N", help="sweep workers")
    args = parser.parse_args(argv)

    try:
        cfg = validate_config(load_config(args.config))
        cfg = _select_tasks(cfg, args.command)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"--seed must be >= 0, got {args.seed}")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        output = dict(cfg.output)
        if args.out:
            output["dir"] = args.out
        if args.format:
            output["format"] = args.format
        cfg = dataclasses.replace(cfg, output=output)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    report = run(cfg, threads=max(1, args.threads))
    paths = emit(report, cfg.output["dir"], cfg.output["format"])

    failed = 0
    for rec in report.results:
        label = f"task {rec['index']} [{rec['type']}]"
        if "error" in rec:
            failed += 1
            print(f"{label} ERROR {rec['error']['kind']}: {rec['error']['message']}")
        else:
            secs = report.timings[f"task-{rec['index']:02d}"]
            print(f"{label} ok ({secs:.2f} s)")
    print(f"wrote {len(paths)} file(s) under {cfg.output['dir']}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
