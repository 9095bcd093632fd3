"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 evaluation budget
exceeded. Set ``STRATPOL_WORKERS`` to change the default parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import generators, sat
from .core import PreconditionError, has_errors, induced_distribution, validate_instance
from .experiment import SOLVERS, run_experiment, run_solver, summarize
from .io import InstanceFormatError, load_instance, load_policy, save_instance, save_result
from .solvers import DEFAULT_BUDGET, BudgetExceededError
from .transport import check_transport_consistency, transport_plan

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in np.asarray(v, dtype=float)) + ")"


def _load_valid(path: str):
    inst = load_instance(path)
    errs = [v for v in validate_instance(inst) if v.severity == "error"]
    for v in errs:
        print(f"error: {v.kind}: {v.message}", file=sys.stderr)
    return inst, bool(errs)


def cmd_validate(args) -> int:
    inst = load_instance(args.file)
    viol = validate_instance(inst, args.tol)
    for v in viol:
        print(f"{v.severity}: {v.kind}: {v.message}")
    if not viol:
        print(f"ok: {inst.m} feature values")
    return EXIT_INVALID if has_errors(viol) else EXIT_OK


def cmd_solve(args) -> int:
    inst, bad = _load_valid(args.file)
    if bad and not args.force:
        return EXIT_INVALID
    opts: dict = {}
    if args.alg == "brute":
        opts["step"] = args.step
        opts["budget"] = args.budget
    if args.alg in ("iter", "par-iter") and args.max_sweeps is not None:
        opts["max_sweeps"] = args.max_sweeps
    if args.alg == "par-iter" and args.workers is not None:
        opts["workers"] = args.workers
    res = run_solver(inst, args.alg, **opts)
    print(f"algorithm: {res.algorithm}")
    print(f"policy: {_fmt(res.policy)}")
    print(f"utility: {res.utility:.12g}")
    print(f"iterations: {res.iterations}  sweeps: {res.sweeps}  rounds: {res.rounds}  "
          f"converged: {res.converged}  wall_ms: {res.wall_ms:.3f}")
    if args.alg == "brute":
        print(f"exact: {res.exact}  co-optima: {res.extra['n_co_optima']}")
    if args.output:
        save_result(inst, res, args.output)
    return EXIT_OK


def cmd_gen(args) -> int:
    fam = args.family
    if fam in ("1d_random", "additive_monotonic"):
        kw = {"m": args.m, "kappa": args.kappa, "seed": args.seed}
        if args.quantum is not None:
            kw["cost_quantum"] = args.quantum
    elif fam in ("2d_mixture", "2d_unimodal"):
        kw = {"alpha": args.alpha}
    elif fam == "toy":
        save_instance(generators.toy_instance(), args.output)
        return EXIT_OK
    else:
        save_instance(generators.nonmonotone_instance(), args.output)
        return EXIT_OK
    if args.gamma is not None:
        kw["gamma"] = args.gamma
    save_instance(generators.FAMILIES[fam](**kw), args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = json.loads(Path(args.spec).read_text())
    recs = run_experiment(spec, args.output, workers=args.workers)
    for name, s in summarize(recs).items():
        print(f"{name}: mean utility {s['mean_utility']:.6g} over {s['n']} cells, "
              f"mean wall {s['mean_wall_ms']:.1f} ms")
    failed = sum(1 for r in recs if r.error)
    if failed:
        print(f"{failed} cells failed; see the error column", file=sys.stderr)
    return EXIT_OK


def cmd_transport(args) -> int:
    inst = load_instance(args.file)
    pi = load_policy(args.policy, inst.m)
    plan = transport_plan(inst, pi)
    np.set_printoptions(precision=6, suppress=True, linewidth=120)
    print("flow:")
    print(plan.flow)
    print(f"objective: {plan.objective:.12g}")
    print(f"induced: {_fmt(induced_distribution(inst, pi))}")
    print(f"consistent: {check_transport_consistency(inst, pi)}")
    return EXIT_OK


def cmd_sat(args) -> int:
    formula = sat.parse_dimacs(Path(args.cnf).read_text())
    inst = sat.from_sat(formula, args.epsilon)
    print(f"variables: {formula.num_vars}  clauses: {len(formula.clauses)}  values: {inst.m}")
    if args.output:
        save_instance(inst, args.output)
    if not (args.solve or args.decode):
        return EXIT_OK
    from .solvers import brute_force

    res = brute_force(inst, 1.0, budget=args.budget, coords=sat.payoff_coords(inst))
    print(f"utility: {res.utility:.12g}")
    if args.decode:
        assignment = sat.decode_assignment(inst, res.policy)
        if assignment is None or not formula.evaluate(assignment):
            print("assignment: none (formula unsatisfiable)")
        else:
            lits = [i if v else -i for i, v in enumerate(assignment, 1)]
            print("assignment: " + " ".join(map(str, lits)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="stratpol", description="Policies for populations that best-respond.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="compute a policy")
    p.add_argument("file")
    p.add_argument("--alg", choices=[s for s in SOLVERS if s != "threshold"], default="iter")
    p.add_argument("--step", type=float, help="grid step for brute force (default: common step)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max brute-force policies")
    p.add_argument("--max-sweeps", type=int)
    p.add_argument("--workers", type=int, help="threads for par-iter")
    p.add_argument("--force", action="store_true", help="solve even if validation fails")
    p.add_argument("-o", "--output", help="write policy and result JSON here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("family", choices=[*generators.FAMILIES, "toy", "nonmonotone"])
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--kappa", type=float, default=0.75)
    p.add_argument("--alpha", type=float, default=3.5)
    p.add_argument("--gamma", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quantum", type=float, help="round costs up to multiples of this")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run a sweep spec")
    p.add_argument("spec")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("transport", help="print the transport plan of a policy")
    p.add_argument("file")
    p.add_argument("policy", help="JSON file or comma-separated values")
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("sat", help="encode a DIMACS CNF formula")
    p.add_argument("cnf")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--solve", action="store_true", help="search 0/1 policies exhaustively")
    p.add_argument("--decode", action="store_true", help="print the decoded assignment")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("-o", "--output", help="write the instance JSON here")
    p.set_defaults(func=cmd_sat)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InstanceFormatError, PreconditionError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
