"""Parameter sweeps over instance families and solvers.

A sweep spec is a JSON object::

    {"family": "1d_random",
     "params": {"m": 50, "kappa": 0.75, "gamma": 0.3},
     "sweep": {"param": "kappa", "values": [0.25, 0.5, 0.75]},
     "repetitions": 8,
     "seed": 0,
     "solvers": ["nonstrategic", "iter", "par-iter"],
     "solver_options": {"par-iter": {"max_sweeps": 20}}}

``family`` may also be ``"file"`` with ``"instance": <path>``. Each
(sweep value, repetition) cell gets the seed
``SeedSequence(seed, spawn_key=(value_index, repetition))``; that scheme is
written back into the spec under ``seed_scheme``.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core import Instance, non_strategic_policy, utility
from .generators import FAMILIES, split_seed
from .io import load_instance, result_to_dict
from .solvers import (
    brute_force,
    common_step,
    dp_search,
    iterative_search,
    parallel_iterative_search,
)
from .solvers.result import SolveResult

SEED_SCHEME = "numpy.SeedSequence(seed, spawn_key=(value_index, repetition))"
CSV_COLUMNS = [
    "algorithm", "seed", "m", "kappa", "alpha", "gamma",
    "utility", "iterations", "converged", "wall_ms", "error",
]
SOLVERS = ("nonstrategic", "threshold", "brute", "iter", "par-iter", "dp")


@dataclass
class ExperimentRecord:
    algorithm: str
    seed: int
    m: int
    kappa: float | None
    alpha: float | None
    gamma: float | None
    utility: float | None
    iterations: int | None
    converged: bool | None
    wall_ms: float | None
    error: str = ""
    value_index: int = 0
    repetition: int = 0
    policy: list[float] | None = field(default=None, repr=False)
    sweeps: int = 0
    rounds: int = 0

    def csv_row(self) -> list[str]:
        def fmt(x: Any) -> str:
            if x is None:
                return ""
            if isinstance(x, float):
                return repr(x)
            return str(x)

        return [fmt(getattr(self, c)) for c in CSV_COLUMNS]


def run_solver(inst: Instance, name: str, **opts: Any) -> SolveResult:
    """Dispatch a solver by its command-line name."""
    if name in ("nonstrategic", "threshold"):
        pi = non_strategic_policy(inst)
        return SolveResult(algorithm=name, policy=pi, utility=utility(inst, pi))
    if name == "brute":
        step = opts.pop("step", None) or common_step(inst)
        if step is None:
            raise ValueError("costs have no rational common step; pass step explicitly")
        return brute_force(inst, step, **opts)
    if name == "iter":
        return iterative_search(inst, **opts)
    if name == "par-iter":
        return parallel_iterative_search(inst, **opts)
    if name == "dp":
        return dp_search(inst, **opts)
    raise ValueError(f"unknown solver {name!r}; choose from {', '.join(SOLVERS)}")


def _make_instance(spec: dict, params: dict, seed: int) -> Instance:
    family = spec["family"]
    if family == "file":
        return load_instance(spec["instance"])
    gen = FAMILIES[family]
    kw = dict(params)
    if family in ("1d_random", "additive_monotonic"):
        kw["seed"] = seed
    return gen(**kw)


def _cell(args: tuple[dict, int, int, Any]) -> list[tuple[ExperimentRecord, dict | None]]:
    spec, vi, rep, value = args
    params = dict(spec.get("params", {}))
    sweep = spec.get("sweep")
    if sweep:
        params[sweep["param"]] = value
    seed = split_seed(int(spec.get("seed", 0)), vi, rep)
    out = []
    try:
        inst = _make_instance(spec, params, seed)
    except Exception as e:  # noqa: BLE001 - recorded, sweep continues
        inst = None
        gen_error = f"{type(e).__name__}: {e}"
    for name in spec["solvers"]:
        base = dict(
            algorithm=name, seed=seed, value_index=vi, repetition=rep,
            m=inst.m if inst is not None else int(params.get("m", 0)),
            kappa=params.get("kappa"), alpha=params.get("alpha"),
            gamma=inst.gamma if inst is not None else params.get("gamma"),
        )
        if inst is None:
            out.append((ExperimentRecord(**base, utility=None, iterations=None,
                                         converged=None, wall_ms=None, error=gen_error), None))
            continue
        opts = dict(spec.get("solver_options", {}).get(name, {}))
        try:
            res = run_solver(inst, name, **opts)
        except Exception as e:  # noqa: BLE001
            out.append((ExperimentRecord(**base, utility=None, iterations=None, converged=None,
                                         wall_ms=None, error=f"{type(e).__name__}: {e}"), None))
            continue
        rec = ExperimentRecord(
            **base, utility=float(res.utility), iterations=int(res.iterations),
            converged=bool(res.converged), wall_ms=float(res.wall_ms),
            policy=[float(v) for v in res.policy], sweeps=res.sweeps, rounds=res.rounds,
        )
        out.append((rec, result_to_dict(inst, res)))
    return out


def _cells(spec: dict) -> list[tuple[dict, int, int, Any]]:
    sweep = spec.get("sweep")
    values = sweep["values"] if sweep else [None]
    reps = int(spec.get("repetitions", 1))
    return [(spec, vi, rep, v) for vi, v in enumerate(values) for rep in range(reps)]


def run_experiment(
    spec: dict, out_dir: str | Path | None = None, workers: int | None = None
) -> list[ExperimentRecord]:
    """Run every (sweep value, repetition, solver) cell of ``spec``.

    Records come back ordered by value, repetition, then solver regardless
    of ``workers`` (default from ``STRATPOL_WORKERS``). With ``out_dir``,
    writes ``results.csv``, ``spec.json`` and one JSON artifact per
    successful cell under ``policies/``.
    """
    spec = dict(spec)
    for name in spec.get("solvers", []):
        if name not in SOLVERS:
            raise ValueError(f"unknown solver {name!r}")
    if spec.get("family") not in (*FAMILIES, "file"):
        raise ValueError(f"unknown family {spec.get('family')!r}")
    spec["seed_scheme"] = SEED_SCHEME
    workers = workers or max(1, int(os.environ.get("STRATPOL_WORKERS", "1")))
    cells = _cells(spec)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]
    flat = [pair for cell in results for pair in cell]
    records = [r for r, _ in flat]
    if out_dir is not None:
        out = Path(out_dir)
        (out / "policies").mkdir(parents=True, exist_ok=True)
        (out / "spec.json").write_text(json.dumps(spec, indent=1) + "\n")
        write_csv(records, out / "results.csv")
        for rec, art in flat:
            if art is None:
                continue
            name = f"v{rec.value_index}_r{rec.repetition}_{rec.algorithm}.json"
            (out / "policies" / name).write_text(json.dumps(art, indent=1) + "\n")
    return records


def write_csv(records: list[ExperimentRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.csv_row())


def summarize(records: list[ExperimentRecord]) -> dict[str, dict[str, float]]:
    """Mean utility and wall time per algorithm over successful cells."""
    out: dict[str, dict[str, float]] = {}
    for name in dict.fromkeys(r.algorithm for r in records):
        ok = [r for r in records if r.algorithm == name and not r.error]
        if ok:
            out[name] = {
                "mean_utility": float(np.mean([r.utility for r in ok])),
                "mean_wall_ms": float(np.mean([r.wall_ms for r in ok])),
                "n": len(ok),
            }
    return out


def record_dict(rec: ExperimentRecord) -> dict[str, Any]:
    return asdict(rec)
