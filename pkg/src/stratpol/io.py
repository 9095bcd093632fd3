"""JSON persistence for instances, policies and solver results.

Instance files look like::

    {"m": 3, "gamma": 0.1, "p": [...], "q": [...],
     "cost": [[0, "inf", ...], ...], "meta": {...}}

with ``reward`` in place of ``q`` for reward-form instances. Structural
problems raise :class:`InstanceFormatError`; modelling problems (masses not
summing to one, negative costs, ...) are left to ``validate_instance``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .core import Instance, as_policy, utility
from .solvers.result import SolveResult


class InstanceFormatError(ValueError):
    pass


def _number(x: Any, where: str) -> float:
    if isinstance(x, bool):
        raise InstanceFormatError(f"{where}: expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    raise InstanceFormatError(f"{where}: expected a number or \"inf\", got {x!r}")


def _vector(doc: dict, key: str, m: int | None) -> np.ndarray:
    val = doc[key]
    if not isinstance(val, list):
        raise InstanceFormatError(f"field '{key}': expected an array")
    if m is not None and len(val) != m:
        raise InstanceFormatError(f"field '{key}': length {len(val)} does not match m={m}")
    return np.array([_number(x, f"field '{key}[{k}]'") for k, x in enumerate(val)])


def instance_from_dict(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level must be a JSON object")
    for key in ("p", "cost"):
        if key not in doc:
            raise InstanceFormatError(f"missing field '{key}'")
    has_q, has_r = "q" in doc, "reward" in doc
    if has_q == has_r:
        raise InstanceFormatError("exactly one of 'q' and 'reward' is required")
    m = doc.get("m")
    if m is not None and (not isinstance(m, int) or isinstance(m, bool) or m < 1):
        raise InstanceFormatError(f"field 'm': expected a positive integer, got {m!r}")
    p = _vector(doc, "p", m)
    m = p.size
    rows = doc["cost"]
    if not isinstance(rows, list) or len(rows) != m:
        raise InstanceFormatError(f"field 'cost': expected {m} rows")
    cost = np.empty((m, m))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise InstanceFormatError(f"field 'cost[{i}]': expected {m} entries")
        for j, x in enumerate(row):
            cost[i, j] = _number(x, f"field 'cost[{i}][{j}]'")
    gamma = doc.get("gamma")
    if gamma is not None:
        gamma = _number(gamma, "field 'gamma'")
    elif has_q:
        raise InstanceFormatError("field 'gamma' is required with 'q'")
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise InstanceFormatError("field 'meta': expected an object")
    if has_q:
        return Instance(p=p, cost=cost, q=_vector(doc, "q", m), gamma=gamma, meta=meta)
    return Instance(p=p, cost=cost, explicit_reward=_vector(doc, "reward", m), gamma=gamma, meta=meta)


def _num_out(x: float) -> Any:
    return "inf" if math.isinf(x) else float(x)


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    doc: dict[str, Any] = {"m": inst.m}
    if inst.gamma is not None:
        doc["gamma"] = inst.gamma
    doc["p"] = [float(x) for x in inst.p]
    if inst.q is not None:
        doc["q"] = [float(x) for x in inst.q]
    else:
        doc["reward"] = [float(x) for x in inst.explicit_reward]
    doc["cost"] = [[_num_out(x) for x in row] for row in inst.cost]
    doc["meta"] = inst.meta
    return doc


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    return instance_from_dict(doc)


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        return loads_instance(path.read_text())
    except InstanceFormatError as e:
        raise InstanceFormatError(f"{path}: {e}") from None


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")


def load_policy(spec: str, m: int | None = None) -> np.ndarray:
    """Policy from a JSON file (a list, or an object with ``policy``) or an
    inline comma-separated list."""
    path = Path(spec)
    if path.is_file():
        doc = json.loads(path.read_text())
        if isinstance(doc, dict):
            doc = doc["policy"]
        return as_policy(doc, m)
    return as_policy([float(x) for x in spec.split(",")], m)


def result_to_dict(inst: Instance, res: SolveResult) -> dict[str, Any]:
    return {"instance": instance_to_dict(inst), "result": res.to_dict()}


def save_result(inst: Instance, res: SolveResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result_to_dict(inst, res), indent=1) + "\n")


def recheck_result(path: str | Path) -> tuple[float, float]:
    """(recorded, recomputed) utility of a saved result artifact."""
    doc = json.loads(Path(path).read_text())
    inst = instance_from_dict(doc["instance"])
    rec = doc["result"]
    return float(rec["utility"]), utility(inst, rec["policy"])
