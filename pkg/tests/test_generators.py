import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratpol.core import cost_profile, has_errors, is_canonical, validate_instance
from stratpol.generators import (
    gen_1d_random,
    gen_2d_mixture_grid,
    gen_2d_unimodal_grid,
    gen_additive_monotonic,
    split_seed,
)
from stratpol.sat import (
    CnfFormula,
    decode_assignment,
    from_sat,
    parse_dimacs,
    payoff_coords,
    to_dimacs,
)
from stratpol.solvers import brute_force


def _offdiag_finite(inst):
    off = ~np.eye(inst.m, dtype=bool)
    return np.isfinite(inst.cost) & off


def test_1d_random_kappa_zero():
    inst = gen_1d_random(6, 0.0, seed=1)
    assert not _offdiag_finite(inst).any()


def test_1d_random_full():
    inst = gen_1d_random(5, 1.0, seed=7)
    fin = _offdiag_finite(inst)
    assert fin.sum() == 20
    assert np.all((inst.cost[fin] >= 0) & (inst.cost[fin] <= 1))


def test_1d_random_paper_scale():
    inst = gen_1d_random(200, 0.75, 0.3, seed=0)
    assert inst.m == 200 and inst.gamma == 0.3
    assert _offdiag_finite(inst).sum() == round(0.75 * 200 * 199)
    assert not has_errors(validate_instance(inst))


def test_reproducible_and_seed_sensitive():
    a, b = gen_1d_random(8, 0.5, seed=3), gen_1d_random(8, 0.5, seed=3)
    assert a == b
    assert a != gen_1d_random(8, 0.5, seed=4)
    assert gen_additive_monotonic(6, 0.4, seed=9) == gen_additive_monotonic(6, 0.4, seed=9)
    assert split_seed(5, 1, 2) == split_seed(5, 1, 2) != split_seed(5, 2, 1)


def test_quantized_costs():
    inst = gen_1d_random(6, 0.8, seed=2, cost_quantum=0.25)
    c = inst.cost[_offdiag_finite(inst)]
    assert np.allclose(c / 0.25, np.round(c / 0.25)) and np.all(c > 0)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 20), st.floats(0.05, 1.0), st.integers(0, 2**32 - 1))
def test_additive_monotonic_profile(m, kappa, seed):
    inst = gen_additive_monotonic(m, kappa, seed=seed)
    prof = cost_profile(inst)
    assert prof.additive and prof.outcome_monotonic
    assert is_canonical(inst)
    assert not has_errors(validate_instance(inst))
    c = inst.cost
    for i in range(m):
        for j in range(i):
            chain = sum(c[k + 1, k] for k in range(j, i))
            assert abs(c[i, j] - chain) <= 1e-12


def test_additive_two_values():
    inst = gen_additive_monotonic(2, 0.5, seed=0)
    assert 0 <= inst.cost[1, 0] <= 2 and inst.cost[0, 1] == 0


def test_additive_expected_reach():
    kappa, m = 0.2, 20
    reach = []
    for seed in range(200):
        c = gen_additive_monotonic(m, kappa, seed=seed).cost
        improving = np.tril(np.ones((m, m), dtype=bool), -1)
        reach.append(((c <= 1) & improving).sum(axis=1).mean())
    assert np.mean(reach) <= kappa * m


@pytest.mark.parametrize("gen", [gen_2d_mixture_grid, gen_2d_unimodal_grid])
def test_grids(gen):
    inst = gen(3.5)
    assert inst.m == 49 and inst.gamma == 0.2
    assert np.all((inst.q >= 0) & (inst.q <= 1))
    assert np.array_equal(inst.cost, inst.cost.T)
    assert cost_profile(inst).triangle
    assert not has_errors(validate_instance(inst))
    assert abs(inst.p.sum() - 1) <= 1e-12


def test_grid_cost_scale():
    a, b = gen_2d_mixture_grid(0.9), gen_2d_mixture_grid(7.0)
    assert np.allclose(a.cost * 0.9, b.cost * 7.0)
    assert a.meta["coords"][8] == [1, 1]
    assert a.cost[0, 8] == pytest.approx(2 / 0.9)


def test_unimodal_outcomes():
    inst = gen_2d_unimodal_grid(1.0)
    at = {tuple(c): k for k, c in enumerate(inst.meta["coords"])}
    assert inst.q[at[(0, 0)]] == 1.0
    assert inst.q[at[(3, 3)]] == 0.5


def test_mixture_outcome_formula():
    inst = gen_2d_mixture_grid(1.0)
    at = {tuple(c): k for k, c in enumerate(inst.meta["coords"])}
    assert inst.q[at[(0, 0)]] == pytest.approx((3 + 7) / 24)
    assert inst.q[at[(6, 5)]] == pytest.approx((6 + 2) / 24 + (6 + 2) / 24)


# reduction from satisfiability

def test_sat_sizes_and_masses():
    inst = from_sat(CnfFormula(1, ((1,),)))
    assert inst.m == 8
    labels = inst.meta["labels"]
    assert inst.p[labels.index("z11")] == pytest.approx(2 / 3)
    assert inst.p.sum() == pytest.approx(1)


@pytest.mark.parametrize("l, s", [(1, 3), (2, 2), (3, 5), (4, 1)])
def test_sat_masses_sum(l, s):
    rng = np.random.default_rng(l * 10 + s)
    clauses = tuple(tuple(int(v) * int(sg) for v, sg in zip(rng.integers(1, l + 1, 2), rng.choice([-1, 1], 2))) for _ in range(s))
    inst = from_sat(CnfFormula(l, clauses))
    assert inst.m == 7 * l + s
    assert inst.p.sum() == pytest.approx(1, abs=1e-12)
    assert not has_errors(validate_instance(inst))


def test_sat_validation_rules():
    with pytest.raises(ValueError):
        CnfFormula(1, ())
    with pytest.raises(ValueError):
        CnfFormula(1, ((),))
    with pytest.raises(ValueError):
        CnfFormula(1, ((2,),))
    with pytest.raises(ValueError):
        from_sat(CnfFormula(1, ((1,),)), epsilon=1.0)


def test_dimacs_round_trip():
    text = "c demo\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n"
    f = parse_dimacs(text)
    assert f.num_vars == 3 and f.clauses == ((1, -2), (2, 3, -1))
    assert parse_dimacs(to_dimacs(f)) == f
    with pytest.raises(ValueError, match="line 2"):
        parse_dimacs("p cnf 1 1\n1 x 0\n")


def test_decode_assignment():
    inst = from_sat(CnfFormula(1, ((1,),)))
    lab = inst.meta["labels"]
    pi = np.zeros(inst.m)
    pi[lab.index("y1")] = 1
    assert decode_assignment(inst, pi) == [True]
    pi[lab.index("ybar1")] = 1
    assert decode_assignment(inst, pi) is None


def _solve(f):
    inst = from_sat(f)
    res = brute_force(inst, 1.0, coords=payoff_coords(inst))
    return decode_assignment(inst, res.policy)


def test_sat_vs_unsat_single_variable():
    sat = _solve(CnfFormula(1, ((1,),)))
    assert sat == [True]
    unsat = _solve(CnfFormula(1, ((1,), (-1,))))
    assert unsat != sat
    assert unsat is None or not CnfFormula(1, ((1,), (-1,))).evaluate(unsat)


def test_two_variable_two_clause_formulas():
    lits = (1, -1, 2, -2)
    for a, b in itertools.product(itertools.combinations(lits, 2), repeat=2):
        f = CnfFormula(2, (a, b))
        got = _solve(f)
        if f.satisfiable():
            assert got is not None and f.evaluate(got)
