"""Acceptance suite: one test per primary criterion.

Each test prints a ``PASS``/``FAIL`` line; the lines are repeated in the
pytest terminal summary. ``python3 tests/test_acceptance.py`` runs the
suite without pytest.
"""

import itertools
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_instance  # noqa: E402

from stratpol.core import (  # noqa: E402
    best_response,
    best_response_omb,
    induced_distribution,
    last_positive,
    non_strategic_policy,
    policy_family_report,
    utility,
)
from stratpol.generators import (  # noqa: E402
    gen_1d_random,
    gen_2d_mixture_grid,
    gen_additive_monotonic,
    nonmonotone_instance,
    toy_instance,
)
from stratpol.sat import CnfFormula, decode_assignment, from_sat, payoff_coords  # noqa: E402
from stratpol.solvers import (  # noqa: E402
    brute_force,
    common_step,
    dp_search,
    iterative_search,
    parallel_iterative_search,
    termination_bound,
)
from stratpol.solvers.result import SolveResult  # noqa: E402
from stratpol.transport import transport_plan  # noqa: E402

LINES: list[str] = []


def report(name: str, ok: bool, detail: str, t0: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail} [{time.perf_counter() - t0:.2f}s]"
    LINES.append(line)
    print(line)
    assert ok, line


def test_toy_optimum():
    t0 = time.perf_counter()
    res = brute_force(toy_instance(), 0.1)
    took = time.perf_counter() - t0
    ok = (
        abs(res.utility - 0.66) <= 1e-9
        and np.allclose(res.policy, [1, 0.7, 0], rtol=0, atol=1e-9)
        and took < 1.0
    )
    report("toy_optimum", ok, f"utility={res.utility:.12g} policy={res.policy.tolist()}", t0)


def test_strategic_beats_non_strategic():
    t0 = time.perf_counter()
    inst = toy_instance()
    u_ns = utility(inst, non_strategic_policy(inst))
    u_opt = brute_force(inst, 0.1).utility
    ok = abs(u_ns - 0.48) <= 1e-9 and u_ns < u_opt
    report("strategic_beats_non_strategic", ok, f"non-strategic={u_ns:.12g} optimum={u_opt:.12g}", t0)


def test_counterexample():
    t0 = time.perf_counter()
    inst = nonmonotone_instance()
    res = brute_force(inst, 0.1)
    took = time.perf_counter() - t0
    co = sorted(map(tuple, np.round(res.co_optima, 12).tolist()))
    want = [(1.0, k / 10, 1.0) for k in range(8)]
    weak = policy_family_report(inst, res.policy).weakly_monotonic
    ok = abs(res.utility - 0.60) <= 1e-9 and co == want and not weak and took < 1.0
    report("counterexample", ok,
           f"utility={res.utility:.12g} co-optima={len(co)} weakly_monotonic={weak}", t0)


def _strictly_increasing(res: SolveResult) -> bool:
    return bool(np.all(np.diff(res.history) > 0))


def test_iterative_guarantees():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    ok = True
    bounded = 0
    worst = ""
    for seed in range(200):
        m = int(rng.integers(2, 31))
        kappa = float(rng.uniform(0.05, 1.0))
        quantum = 0.05 if seed % 2 == 0 else None
        inst = gen_1d_random(m, kappa, 0.3, seed=seed, cost_quantum=quantum)
        res = iterative_search(inst)
        step = common_step(inst)
        within = True
        if step is not None:
            bounded += 1
            within = res.iterations <= termination_bound(m, step)
        if not (res.converged and _strictly_increasing(res) and within):
            ok = False
            worst = f" first failure seed={seed}"
            break
    took = time.perf_counter() - t0
    ok = ok and took < 60
    report("iterative_guarantees", ok, f"200 instances, {bounded} with a common step{worst}", t0)


def test_oracle_dominance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    ok = True
    checked = 0
    for seed in range(100):
        m = int(rng.integers(1, 7)) if seed % 2 else int(rng.integers(2, 7))
        if seed % 2:
            inst = gen_1d_random(m, float(rng.uniform(0, 1)), 0.3, seed=seed, cost_quantum=0.2)
        else:
            inst = gen_additive_monotonic(m, float(rng.uniform(0.2, 1)), 0.15, seed=seed, cost_quantum=0.2)
        step = common_step(inst)
        best = brute_force(inst, step)
        sols = [iterative_search(inst), parallel_iterative_search(inst)]
        if seed % 2 == 0:
            sols.append(dp_search(inst))
        for s in sols:
            checked += 1
            if not (0 <= s.utility <= best.utility + 1e-12):
                ok = False
    took = time.perf_counter() - t0
    ok = ok and took < 300
    report("oracle_dominance", ok, f"100 instances, {checked} solver runs bounded by brute force", t0)


def _omb_policies(inst, step):
    r = last_positive(inst)
    m = inst.m
    if r < 0:
        yield np.zeros(m)
        return
    n = round(1 / step)
    for top in range(n + 1):
        for choice in itertools.product((0, 1), repeat=r):
            pi = np.zeros(m)
            pi[0] = top / n
            for k in range(1, r + 1):
                pi[k] = pi[k - 1] - (inst.cost[k, k - 1] if choice[k - 1] else 0.0)
            if np.all(pi >= -1e-12):
                yield np.maximum(pi, 0.0)


def test_omb_sufficiency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    for seed in range(100):
        m = int(rng.integers(2, 7))
        inst = gen_additive_monotonic(m, float(rng.uniform(0.2, 1)), 0.15, seed=seed, cost_quantum=0.2)
        step = common_step(inst)
        best = brute_force(inst, step).utility
        omb = max(utility(inst, pi) for pi in _omb_policies(inst, step))
        worst = max(worst, best - omb)
    report("omb_sufficiency", worst <= 1e-9, f"largest brute-minus-OMB gap={worst:.3g}", t0)


def test_dp_quality():
    t0 = time.perf_counter()
    gaps, rounds, dpu, itu = [], [], [], []
    for seed in range(20):
        inst = gen_additive_monotonic(8, 0.1, 0.15, seed=seed, cost_quantum=0.25)
        best = brute_force(inst, common_step(inst)).utility
        dp = dp_search(inst)
        gaps.append((best - dp.utility) / best if best > 0 else 0.0)
        rounds.append(dp.rounds)
        dpu.append(dp.utility)
        itu.append(iterative_search(inst).utility)
    few = np.mean(np.array(rounds) <= 3)
    ok = np.mean(gaps) <= 0.02 and np.mean(dpu) >= np.mean(itu) and few >= 0.9
    report("dp_quality", ok,
           f"mean gap={np.mean(gaps):.3g} dp mean={np.mean(dpu):.6g} iter mean={np.mean(itu):.6g} "
           f"rounds<=3 on {few:.0%}", t0)


def test_transport_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(500)
    worst = 0.0
    for _ in range(500):
        inst = random_instance(rng, int(rng.integers(1, 16)), float(rng.uniform(0, 0.8)))
        pi = rng.uniform(0, 1, inst.m)
        if rng.random() < 0.5:
            pi = np.round(pi * 10) / 10
        diff = transport_plan(inst, pi).induced - induced_distribution(inst, pi)
        worst = max(worst, float(np.abs(diff).max()))
    report("transport_equivalence", worst <= 1e-9, f"500 pairs, max deviation={worst:.3g}", t0)


def test_omb_best_response_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    mismatches = 0
    for seed in range(1000):
        m = int(rng.integers(1, 13))
        inst = gen_additive_monotonic(max(m, 2), float(rng.uniform(0.05, 1)), seed=seed)
        r = last_positive(inst)
        pi = np.zeros(inst.m)
        if r >= 0:
            pi[0] = 1.0 if rng.random() < 0.7 else float(rng.uniform())
            for k in range(1, r + 1):
                drop = pi[k - 1] - inst.cost[k, k - 1]
                pi[k] = drop if rng.random() < 0.5 and drop >= 0 else pi[k - 1]
        a = best_response(inst, pi).target
        b = best_response_omb(inst, pi).target
        mismatches += int(not np.array_equal(a, b))
    report("omb_best_response_equivalence", mismatches == 0, f"1000 pairs, {mismatches} mismatches", t0)


def test_sat_decode():
    t0 = time.perf_counter()
    lits = (1, -1, 2, -2)
    clauses = [tuple(l for l, b in zip(lits, bits) if b) for bits in itertools.product((0, 1), repeat=4)]
    clauses = [c for c in clauses if c]
    n = wrong = 0
    for k in (1, 2, 3):
        for cls in itertools.product(clauses, repeat=k):
            f = CnfFormula(2, cls)
            inst = from_sat(f)
            res = brute_force(inst, 1.0, coords=payoff_coords(inst))
            a = decode_assignment(inst, res.policy)
            found = a is not None and f.evaluate(a)
            n += 1
            wrong += int(found != f.satisfiable())
    took = time.perf_counter() - t0
    report("sat_decode", wrong == 0 and took < 60, f"{n} formulas, {wrong} wrong", t0)


def test_parallel_parity():
    t0 = time.perf_counter()
    ratios, sweeps = [], []
    for seed in range(20):
        inst = gen_1d_random(50, 0.75, 0.3, seed=seed)
        a = iterative_search(inst)
        b = parallel_iterative_search(inst, max_sweeps=20)
        ratios.append(abs(b.utility - a.utility) / a.utility)
        sweeps.append(b.sweeps)
    ok = max(ratios) <= 0.05 and max(sweeps) <= 20
    report("parallel_parity", ok, f"max relative difference={max(ratios):.3g} max sweeps={max(sweeps)}", t0)


def test_concentration_with_alpha():
    t0 = time.perf_counter()
    sizes = []
    for alpha in (0.9, 3.5, 7.0):
        inst = gen_2d_mixture_grid(alpha)
        res = iterative_search(inst)
        sizes.append(int((induced_distribution(inst, res.policy) > 1e-12).sum()))
    ok = sizes[0] > sizes[1] > sizes[2]
    report("concentration_with_alpha", ok, f"support sizes for alpha 0.9, 3.5, 7: {sizes}", t0)


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    raise SystemExit(1 if failed else 0)
