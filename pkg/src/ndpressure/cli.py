"""Configuration ingestion, run orchestration, and report emission.

Configs are one schema in two encodings (JSON, or an INI-like table whose
values are JSON fragments). Reports are JSON documents with stable key order
and floats at 17 significant digits, plus CSV per-scale tables; identical
configs produce byte-identical outputs for any worker count.

Exit codes: 0 success, 1 configuration error (diagnostic names the field),
2 an assertion-bearing task failed its tolerance, 3 oracle capacity error.
"""

import argparse
import configparser
import json
import math
import os
import sys

import numpy as np

from . import measure as _measure
from ._parallel import pmap
from .oracle import CapacityError, OracleBudget
from .cover import fixed_cover_sum, packing_sum
from .pressure import pressure_estimate, relationship_report
from .space import PointSet
from .systems import BUILTIN_FAMILIES, builtin_system

__all__ = ["main", "load_config", "run_config", "ConfigError", "write_json", "write_csv"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# Deterministic emission


def _fmt_float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def _dump(obj, indent):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{pad}  {json.dumps(str(k))}: {_dump(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{pad}  {_dump(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(_dump(obj, 0) + "\n")


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if isinstance(v, (float, np.floating)):
                    cells.append(format(float(v), ".17g"))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# Config loading and validation


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("<root>", f"invalid JSON: {e}") from None
    else:
        raw = _from_ini(text)
    return validate_config(raw)


def _from_ini(text):
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError("<root>", f"invalid table config: {e}") from None
    out = {}
    for section in parser.sections():
        if section == "config":
            target = out
        else:
            target = out
            for part in section.split("."):
                target = target.setdefault(part, {})
        for key, value in parser.items(section):
            try:
                target[key] = json.loads(value)
            except json.JSONDecodeError:
                target[key] = value
    if "task" in out:
        tasks = out.pop("task")
        out["tasks"] = [tasks[k] for k in sorted(tasks)]
    return out


def _need(raw, path, key, kind=None):
    if key not in raw:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    value = raw[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}" if path else key, f"expected {kind.__name__}")
    return value


def validate_config(raw):
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    version = raw.get("version")
    if version != SCHEMA_VERSION:
        raise ConfigError("version", f"unsupported schema version {version!r}; expected {SCHEMA_VERSION}")
    system_spec = _need(raw, "", "system", dict)
    family = system_spec.get("family")
    if family not in BUILTIN_FAMILIES and "dist_matrix" not in system_spec:
        raise ConfigError("system.family", f"unknown family {family!r}")
    sched = _need(raw, "", "schedules", dict)
    eps = _need(sched, "schedules", "eps", list)
    if not eps or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("schedules.eps", "must be a nonempty strictly descending schedule")
    n_sched = _need(sched, "schedules", "n", list)
    if not n_sched or any(b <= a for a, b in zip(n_sched, n_sched[1:])):
        raise ConfigError("schedules.n", "must be a nonempty strictly ascending schedule")
    if family == "cyclic-shift":
        length = int(system_spec.get("length", 8))
        if max(n_sched) > length:
            raise ConfigError("schedules.n", f"horizon {max(n_sched)} exceeds the shift length {length}")
        n_max = int(sched.get("n_max", max(n_sched)))
        if n_max > length:
            raise ConfigError("schedules.n_max", f"window end {n_max} exceeds the shift length {length}")
    n_min = int(sched.get("n_min", n_sched[0]))
    n_max = int(sched.get("n_max", n_sched[-1]))
    if n_min < 1 or n_max < n_min:
        raise ConfigError("schedules.n_min", "need 1 <= n_min <= n_max")
    tol = float(sched.get("tol", 1e-4))
    if tol <= 0:
        raise ConfigError("schedules.tol", "tol must be positive")
    delta = sched.get("delta", [0.0])
    if any(d < 0 or d >= 1 for d in delta) or any(b >= a for a, b in zip(delta, delta[1:])):
        raise ConfigError("schedules.delta", "must be strictly descending within [0, 1)")
    tasks = _need(raw, "", "tasks", list)
    if not tasks:
        raise ConfigError("tasks", "at least one task is required")
    for i, task in enumerate(tasks):
        if not isinstance(task, dict) or "kind" not in task:
            raise ConfigError(f"tasks[{i}].kind", "every task needs a kind")
        if task["kind"] not in _TASK_RUNNERS:
            raise ConfigError(f"tasks[{i}].kind", f"unknown task kind {task['kind']!r}")
    return raw


def _build_system(spec):
    if "dist_matrix" in spec:
        from .space import MetricSpace
        from .systems import MapSequence, Potential, System

        matrix = np.asarray(spec["dist_matrix"], dtype=float)
        space = MetricSpace.from_matrix(matrix)
        tables = [np.asarray(t, dtype=np.int64) for t in spec["map_tables"]]
        maps = MapSequence.cycle(tables, preperiod=int(spec.get("preperiod", 0)))
        phi = Potential(np.asarray(spec.get("potential", np.zeros(space.size)), dtype=float))
        return System(space, maps, phi, name=spec.get("name", "inline"))
    return builtin_system(spec)


def _resolve_subset(system, spec):
    if spec in (None, "all"):
        return system.space.all_points()
    if isinstance(spec, list):
        try:
            return system.space.subset(spec)
        except ValueError as e:
            raise ConfigError("subset", str(e)) from None
    if isinstance(spec, dict) and "prefix" in spec:
        words = system.meta.get("words")
        if words is None:
            raise ConfigError("subset.prefix", "prefix subsets need a cyclic-shift system")
        prefix = np.asarray(spec["prefix"], dtype=np.int64)
        hit = np.all(words[:, : prefix.size] == prefix[None, :], axis=1)
        return PointSet(np.nonzero(hit)[0], system.space)
    raise ConfigError("subset", f"cannot interpret subset {spec!r}")


def _resolve_measure(system, spec, path):
    size = system.space.size
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "uniform":
            return _measure.DiscreteMeasure.uniform(size)
        if kind == "dirac":
            return _measure.DiscreteMeasure.dirac(size, int(spec["point"]))
        if kind == "bernoulli":
            return _measure.bernoulli_measure(system, float(spec["p"]))
        if kind == "weights":
            return _measure.DiscreteMeasure(np.asarray(spec["weights"], dtype=float))
    raise ConfigError(path, f"cannot interpret measure {spec!r}")


# ---------------------------------------------------------------------------
# Task runners


def _task_pressure(ctx, task):
    which = task.get("which", "classical")
    est = pressure_estimate(
        which,
        ctx["system"],
        ctx["K"],
        eps_schedule=ctx["eps"],
        n_schedule=ctx["n"],
        n_min=ctx["n_min"],
        n_max=ctx["n_max"],
        parts=int(task.get("parts", ctx["parts"])),
        tol=ctx["tol"],
        exact=task.get("exact", "auto"),
        budget=ctx["budget"],
    )
    return {
        "report": est.to_dict(),
        "csv": [("per_scale", ["kind", "eps", "n", "raw_log", "normalized"], est.csv_rows())],
        "summary": f"pressure[{which}] value={est.value:.6g} exact={est.exact}",
        "passed": True,
    }


def _task_relationship(ctx, task):
    rep = relationship_report(
        ctx["system"],
        ctx["K"],
        eps_schedule=ctx["eps"],
        n_min=ctx["n_min"],
        n_max=ctx["n_max"],
        parts=ctx["parts"],
        tol=ctx["tol"],
        chain_tol=float(task.get("chain_tol", 0.05)),
        exact=task.get("exact", "auto"),
        budget=ctx["budget"],
    )
    csv_rows = []
    for name, est in rep.estimates.items():
        csv_rows.extend(est.csv_rows())
    return {
        "report": rep.to_dict(),
        "csv": [("per_scale", ["kind", "eps", "n", "raw_log", "normalized"], csv_rows)],
        "summary": f"relationship passed={rep.passed}",
        "passed": rep.passed,
    }


def _task_local(ctx, task):
    mu = _resolve_measure(ctx["system"], task.get("measure"), "tasks.local.measure")
    points = task.get("points")
    prof = _measure.local_pressure(
        mu,
        ctx["system"],
        sample_points=None if points in (None, "support") else points,
        eps_schedule=ctx["eps"],
        n_schedule=ctx["n"],
    )
    report = {
        "points": [int(p) for p in prof.points],
        "upper": list(prof.upper),
        "lower": list(prof.lower),
        "has_infinite": prof.has_infinite,
    }
    return {
        "report": report,
        "csv": [("local_profile", ["point", "eps", "n", "value"], prof.csv_rows())],
        "summary": f"local profile over {prof.points.size} points",
        "passed": True,
    }


def _task_measure_pressure(ctx, task):
    mu = _resolve_measure(ctx["system"], task.get("measure"), "tasks.measure-pressure.measure")
    which = task.get("which", "packing")
    details = {}
    if which == "spanning":
        value = _measure.spanning_measure_pressure(
            mu, ctx["system"], eps_schedule=ctx["eps"], n_schedule=ctx["n"], delta_schedule=ctx["delta"], budget=ctx["budget"]
        )
    else:
        value = _measure.measure_cp_pressure(
            mu,
            ctx["system"],
            which,
            eps_schedule=ctx["eps"],
            n_min=ctx["n_min"],
            n_max=ctx["n_max"],
            delta_schedule=ctx["delta"],
            parts=ctx["parts"],
            tol=ctx["tol"],
            budget=ctx["budget"],
            details=details,
        )
    return {
        "report": {"which": which, "measure": mu.name, "value": value, "details": _measure._plain(details)},
        "csv": [],
        "summary": f"measure-pressure[{which}] value={value:.6g}",
        "passed": True,
    }


def _task_distribution(ctx, task):
    mus = [_resolve_measure(ctx["system"], m, "tasks.distribution.measures") for m in task["measures"]]
    rep = _measure.distribution_principle_check(
        mus,
        ctx["K"],
        float(task["s"]),
        system=ctx["system"],
        eps=float(task.get("eps", ctx["eps"][-1])),
        big_k=float(task.get("big_k", 1.0)),
        n_schedule=ctx["n"],
        n_min=ctx["n_min"],
        n_max=ctx["n_max"],
        tol=float(task.get("tol", 0.05)),
        budget=ctx["budget"],
    )
    expected = bool(task.get("expect_pass", True))
    ok = rep.passed == expected
    return {
        "report": rep.to_dict(),
        "csv": [],
        "summary": f"distribution-principle passed={rep.passed}",
        "passed": ok,
    }


def _task_billingsley(ctx, task):
    mu = _resolve_measure(ctx["system"], task["measure"], "tasks.billingsley.measure")
    prof = _measure.local_pressure(mu, ctx["system"], sample_points=ctx["K"], eps_schedule=ctx["eps"], n_schedule=ctx["n"])
    rep = _measure.billingsley_bound(
        mu,
        ctx["K"],
        float(task["s"]),
        prof,
        task.get("direction", "upper_le"),
        system=ctx["system"],
        n_min=ctx["n_min"],
        n_max=ctx["n_max"],
        parts=ctx["parts"],
        tol=float(task.get("tol", 0.05)),
        budget=ctx["budget"],
    )
    return {"report": rep.to_dict(), "csv": [], "summary": f"billingsley passed={rep.passed}", "passed": rep.passed}


def _task_variational(ctx, task):
    family = [_resolve_measure(ctx["system"], m, "tasks.variational.family") for m in task["family"]]
    rep = _measure.variational_gap(
        ctx["K"],
        family,
        system=ctx["system"],
        eps_schedule=ctx["eps"],
        n_schedule=ctx["n"],
        n_min=ctx["n_min"],
        n_max=ctx["n_max"],
        parts=ctx["parts"],
        tol=float(task.get("tol", 0.05)),
        budget=ctx["budget"],
    )
    return {"report": rep.to_dict(), "csv": [], "summary": f"variational passed={rep.passed}", "passed": rep.passed}


def _task_generic(ctx, task):
    mu = _resolve_measure(ctx["system"], task["measure"], "tasks.generic.measure")
    fam = _measure.default_family(ctx["system"])
    rep = _measure.packing_bound_on_generic(
        mu,
        ctx["system"],
        fam,
        float(task["radius"]),
        m=int(task.get("m", 1)),
        n_max=int(task.get("n_max", ctx["n"][-1])),
        eps_schedule=ctx["eps"],
        parts=ctx["parts"],
        tol=float(task.get("tol", 0.05)),
        budget=ctx["budget"],
    )
    return {"report": rep.to_dict(), "csv": [], "summary": f"generic bound passed={rep.passed}", "passed": rep.passed}


def _task_nonwandering(ctx, task):
    pts = _measure.non_wandering_set(ctx["system"], int(task.get("k_max", 8)), float(task["radius"]))
    report = {"points": [int(p) for p in pts]}
    expected = task.get("expect_points")
    ok = True if expected is None else [int(p) for p in pts] == [int(p) for p in expected]
    return {"report": report, "csv": [], "summary": f"nonwandering size={len(pts)}", "passed": ok}


def _task_uniform_limit(ctx, task):
    system = ctx["system"]
    limit = system.meta.get("limit_table")
    if limit is None:
        raise ConfigError("tasks.uniform-limit", "system family does not declare a limit map")
    mu = _resolve_measure(system, task["measure"], "tasks.uniform-limit.measure")
    fam = _measure.default_family(system)
    rep = _measure.uniform_limit_check(mu, system, limit, fam, int(task.get("horizon", 8)))
    return {"report": rep.to_dict(), "csv": [], "summary": f"uniform-limit passed={rep.passed}", "passed": rep.passed}


def _task_oracle_compare(ctx, task):
    system, K = ctx["system"], ctx["K"]
    rows = []
    for eps in ctx["eps"]:
        for n in ctx["n"]:
            greedy = fixed_cover_sum(system.space, system.maps, K, system.potential, n, eps, exact="greedy")
            exact = fixed_cover_sum(system.space, system.maps, K, system.potential, n, eps, exact="oracle", budget=ctx["budget"])
            pg = packing_sum(system.space, system.maps, K, system.potential, eps, 0.0, n, n, exact="greedy")
            pe = packing_sum(system.space, system.maps, K, system.potential, eps, 0.0, n, n, exact="oracle", budget=ctx["budget"])
            rows.append(
                {
                    "eps": eps,
                    "n": n,
                    "cover_greedy": greedy.log_value,
                    "cover_exact": exact.log_value,
                    "packing_greedy": pg.log_value,
                    "packing_exact": pe.log_value,
                }
            )
    ok = all(r["cover_greedy"] >= r["cover_exact"] - 1e-12 and r["packing_greedy"] <= r["packing_exact"] + 1e-12 for r in rows)
    return {
        "report": {"comparisons": rows},
        "csv": [
            (
                "oracle_compare",
                ["eps", "n", "cover_greedy", "cover_exact", "packing_greedy", "packing_exact"],
                [(r["eps"], r["n"], r["cover_greedy"], r["cover_exact"], r["packing_greedy"], r["packing_exact"]) for r in rows],
            )
        ],
        "summary": f"oracle-compare consistent={ok}",
        "passed": ok,
    }


_TASK_RUNNERS = {
    "pressure": _task_pressure,
    "relationship": _task_relationship,
    "local": _task_local,
    "measure-pressure": _task_measure_pressure,
    "distribution": _task_distribution,
    "billingsley": _task_billingsley,
    "variational": _task_variational,
    "generic": _task_generic,
    "nonwandering": _task_nonwandering,
    "uniform-limit": _task_uniform_limit,
    "oracle-compare": _task_oracle_compare,
}


def run_config(config, out_dir=None):
    """Execute every task of a validated config; returns (exit_code, summaries)."""
    system = _build_system(config["system"])
    sched = config["schedules"]
    budget_spec = config.get("budget", {})
    ctx = {
        "system": system,
        "K": _resolve_subset(system, config.get("subset")),
        "eps": [float(e) for e in sched["eps"]],
        "n": [int(n) for n in sched["n"]],
        "n_min": int(sched.get("n_min", sched["n"][0])),
        "n_max": int(sched.get("n_max", sched["n"][-1])),
        "parts": int(sched.get("parts", 1)),
        "tol": float(sched.get("tol", 1e-4)),
        "delta": [float(d) for d in sched.get("delta", [0.0])],
        "budget": OracleBudget(**budget_spec) if budget_spec else None,
    }
    out_dir = out_dir or config.get("output", {}).get("dir", ".")
    formats = config.get("output", {}).get("formats", ["json", "csv"])
    os.makedirs(out_dir, exist_ok=True)

    def run_one(item):
        index, task = item
        runner = _TASK_RUNNERS[task["kind"]]
        return runner(ctx, task)

    try:
        results = pmap(run_one, list(enumerate(config["tasks"])))
    except CapacityError as e:
        return 3, [f"oracle capacity error: {e}"]
    summaries = []
    all_passed = True
    for index, (task, result) in enumerate(zip(config["tasks"], results)):
        stem = f"task_{index:02d}_{task['kind'].replace('-', '_')}"
        if "json" in formats:
            write_json(os.path.join(out_dir, stem + ".json"), result["report"])
        if "csv" in formats:
            for name, header, rows in result["csv"]:
                write_csv(os.path.join(out_dir, f"{stem}_{name}.csv"), header, rows)
        summaries.append(f"{stem}: {result['summary']}")
        all_passed &= bool(result["passed"])
    return (0 if all_passed else 2), summaries


# ---------------------------------------------------------------------------
# Entry point


def main(argv=None):
    parser = argparse.ArgumentParser(prog="ndpressure", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", help="reserved; rejected (no randomized paths exist)")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute the tasks of a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None)
    p_desc = sub.add_parser("describe", help="describe a built-in system family or a config's system")
    p_desc.add_argument("system")
    p_ver = sub.add_parser("verify", help="run the committed acceptance suite")
    p_ver.add_argument("--out", default="verify_out")
    p_cmp = sub.add_parser("oracle-compare", help="greedy-versus-oracle comparison for a config")
    p_cmp.add_argument("config")
    p_cmp.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    if args.seed is not None:
        print("error: --seed is reserved and rejected; no randomized paths exist", file=sys.stderr)
        return 1

    if args.command == "describe":
        return _cmd_describe(args.system)
    if args.command == "verify":
        from . import verify as _verify

        reports, passed = _verify.run_all(args.out)
        for rep in reports:
            print(f"criterion {rep['criterion']:>2} {'PASS' if rep['passed'] else 'FAIL'}  {rep['name']}")
        return 0 if passed else 2

    try:
        config = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 1
    if args.command == "oracle-compare":
        config = dict(config)
        config["tasks"] = [{"kind": "oracle-compare"}]
    try:
        code, summaries = run_config(config, args.out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except CapacityError as e:
        print(f"oracle capacity error: {e}", file=sys.stderr)
        return 3
    for line in summaries:
        print(line)
    return code


def _cmd_describe(name):
    if os.path.exists(name):
        try:
            config = load_config(name)
        except ConfigError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 1
        spec = config["system"]
    else:
        if name not in BUILTIN_FAMILIES:
            print(f"config error: system.family: unknown family {name!r}", file=sys.stderr)
            return 1
        spec = {"family": name}
    try:
        system = _build_system(spec)
    except (ValueError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    meta = {k: v for k, v in system.meta.items() if isinstance(v, (str, int, float, bool))}
    print(_dump({"name": system.name, "points": system.space.size, "meta": meta, "potential": system.potential.name}, 0))
    return 0


if __name__ == "__main__":
    sys.exit(main())
