"""Command-line driver: ``generate``, ``solve`` and ``check``.

Exit codes: 0 optimal or check passed, 1 tolerance not reached, 2 usage or
input error, 3 internal solver failure.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import pmm
from .config import SolverConfig
from .exceptions import SsnPmmError, TooLarge
from .generators import ControlInstanceSpec, Family, generate, random_l1qp
from .precond import spectral_diagnostic
from .problem import (
    Status,
    kkt_residuals,
    load_problem,
    load_solution,
    problem_summary,
    save_problem,
    save_solution,
)
from .ssn import build_active_sets, natural_map
from .subproblem import PenaltyState, PmmState

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_USAGE = 2
EXIT_FAILURE = 3

SOLUTION_NAME = "solution.json"


class _Parser(argparse.ArgumentParser):
    """``argparse`` parser that raises instead of exiting, so ``main`` owns exit codes."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _report_lines(p, sol, cfg):
    r = sol.report
    res = r.final_residuals
    return [
        f"problem = {p.name}",
        f"n = {p.n}",
        f"m = {p.m}",
        f"status = {sol.status.value}",
        f"PMM = {r.pmm_iters}",
        f"SSN = {r.ssn_iters}",
        f"MINRES_total = {r.minres_iters_total}",
        f"MINRES_avg = {r.minres_avg:.2f}",
        f"factorizations = {r.factorizations}",
        f"time_s = {r.wall_time_seconds:.3f}",
        f"warmstart = {'on' if cfg.warmstart else 'skipped'}",
        f"warmstart_iters = {r.warmstart_iters}",
        f"warmstart_time_s = {r.warmstart_time_seconds:.3f}",
        f"residual_dual = {res[0]:.3e}",
        f"residual_primal = {res[1]:.3e}",
        f"residual_compl = {res[2]:.3e}",
        f"linesearch_failures = {r.linesearch_failures}",
        f"minres_unconverged = {r.minres_unconverged}",
        f"seed = {r.seed}",
        f"message = {r.message}",
    ]


def _bundle_dir(problem):
    path = Path(problem)
    return path.parent if path.is_file() else path


def cmd_generate(args):
    if args.family == "random":
        if args.n is None:
            raise _UsageError("generate random: --n is required")
        m = args.m if args.m is not None else max(args.n // 3, 1)
        rng = np.random.default_rng(args.seed)
        p = random_l1qp(rng, args.n, m, name=f"random_n{args.n}_m{m}_s{args.seed}")
    else:
        if args.grid is None:
            raise _UsageError(f"generate {args.family}: --grid is required")
        spec = ControlInstanceSpec(
            Family(args.family), args.grid, args.alpha1, args.alpha2, args.eps
        )
        p = generate(spec)
    save_problem(p, args.out)
    print(problem_summary(p))
    print(f"written = {args.out}")
    return EXIT_OK


def _config_from_args(args):
    overrides = {
        "tol": args.tol,
        "max_pmm": args.max_pmm,
        "max_ssn_per_subproblem": args.max_ssn,
        "minres_maxit": args.minres_maxit,
        "warmstart_tol": args.warmstart_tol,
        "warmstart_maxit": args.warmstart_maxit,
        "beta0": args.beta0,
        "rho0": args.rho0,
        "seed": args.seed,
    }
    if args.no_warmstart:
        overrides["warmstart"] = False
    return SolverConfig.from_env(**overrides)


def cmd_solve(args):
    p = load_problem(args.problem)
    cfg = _config_from_args(args)
    log.info("%s", problem_summary(p))
    sol = pmm.solve(p, cfg)
    out = Path(args.output) if args.output else _bundle_dir(args.problem) / SOLUTION_NAME
    save_solution(sol, out)
    if args.json:
        head = {"problem": p.name, "status": sol.status.value, "warmstart": cfg.warmstart}
        print(json.dumps({**head, **sol.report.to_dict()}))
    else:
        print("\n".join(_report_lines(p, sol, cfg)))
        print(f"solution = {out}")
    if sol.status is Status.OPTIMAL:
        return EXIT_OK
    if sol.status is Status.MAX_ITERATIONS:
        return EXIT_NOT_CONVERGED
    return EXIT_FAILURE


def _spectral_at(p, sol, cfg):
    """Spectral diagnostic at the stored iterate with the configured initial penalties."""
    pen = PenaltyState(cfg.beta0, cfg.rho0, pmm.choose_zeta(p), cfg.beta_max, cfg.tau_min)
    s = PmmState(0, sol.x, sol.y, sol.z, pen)
    _, u_hat = natural_map(sol.x, sol.y, s, p)
    sets = build_active_sets(sol.x, sol.z, u_hat, s, p)
    return spectral_diagnostic(p, sets, s)


def cmd_check(args):
    p = load_problem(args.problem)
    path = args.solution or _bundle_dir(args.problem) / SOLUTION_NAME
    sol = load_solution(path)
    cfg = SolverConfig.from_env(tol=args.tol)
    res = kkt_residuals(p, sol.x, sol.y, sol.z)
    ok = max(res) <= cfg.tol
    print(f"residual_dual = {res[0]:.3e}")
    print(f"residual_primal = {res[1]:.3e}")
    print(f"residual_compl = {res[2]:.3e}")
    print(f"tol = {cfg.tol:.1e}")
    print(f"kkt_ok = {ok}")
    if args.spectral:
        try:
            rep = _spectral_at(p, sol, cfg)
        except TooLarge as exc:
            raise _UsageError(f"--spectral: {exc}") from None
        print("\n".join(rep.lines()))
        ok = ok and rep.schur_ok and rep.system_ok
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def _add_solver_flags(sp):
    sp.add_argument("--tol", type=float, default=None, help="termination tolerance")
    sp.add_argument("--max-pmm", type=int, default=None, help="outer iteration cap")
    sp.add_argument("--max-ssn", type=int, default=None, help="Newton steps per sub-problem")
    sp.add_argument("--minres-maxit", type=int, default=None)
    sp.add_argument("--no-warmstart", action="store_true", help="skip the ADMM warm start")
    sp.add_argument("--warmstart-tol", type=float, default=None)
    sp.add_argument("--warmstart-maxit", type=int, default=None)
    sp.add_argument("--beta0", type=float, default=None)
    sp.add_argument("--rho0", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = _Parser(prog="ssnpmm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a problem bundle")
    gen.add_argument("family", choices=[f.value for f in Family] + ["random"])
    gen.add_argument("--grid", type=int, help="interior nodes per side")
    gen.add_argument("--alpha1", type=float, default=1e-2, help="l1 weight")
    gen.add_argument("--alpha2", type=float, default=1e-2, help="l2 weight")
    gen.add_argument("--eps", type=float, default=0.02, help="diffusion coefficient")
    gen.add_argument("--n", type=int, help="variables (random family)")
    gen.add_argument("--m", type=int, help="constraints (random family)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_generate)

    solve = sub.add_parser("solve", help="solve a problem bundle")
    solve.add_argument("problem", help="bundle directory or manifest file")
    _add_solver_flags(solve)
    solve.add_argument("-o", "--output", help="solution file (default: <bundle>/solution.json)")
    solve.add_argument("--json", action="store_true", help="print the report as JSON")
    solve.set_defaults(func=cmd_solve)

    check = sub.add_parser("check", help="verify a stored solution")
    check.add_argument("problem")
    check.add_argument("solution", nargs="?", help="solution file (default: <bundle>/solution.json)")
    check.add_argument("--tol", type=float, default=None)
    check.add_argument("--spectral", action="store_true", help="dense spectral bound check")
    check.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError(parser.format_usage().strip())
        logging.basicConfig(
            level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SsnPmmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("internal failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
