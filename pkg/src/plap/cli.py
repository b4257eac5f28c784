"""Command line interface.

    plap run <scenario.json>         full pipeline, reports and figures
    plap thresholds <scenario.json>  constants and admissibility only
    plap sweep <dir>                 every *.json scenario in a directory

Shared flags: --h <spacing> overrides the grid spacing, --tol <real> the
torsion solver tolerance, --out <dir> the output directory, --seed <int>
the probe seed.  Exit codes for run (and the worst scenario under sweep):
0 all-pass, 1 malformed configuration, 2 hypothesis or threshold failure,
3 solver failure.  thresholds exits 0 once the constants are computed and
prints the admissibility verdict.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .apps import EXIT_CONFIG, run_scenario, threshold_report
from .eigen import principal_eigenpair
from .plaplace import PLapSolver, solve_torsion
from .report import write_json
from .scenario import ScenarioError, load_scenario

_F = "%.17g"


def _add_shared(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--h", type=float, default=None, help="override grid spacing")
    sp.add_argument("--tol", type=float, default=None, help="override solver tolerance")
    sp.add_argument("--out", type=str, default="out", help="output directory")
    sp.add_argument("--seed", type=int, default=0, help="seed for randomized probes")


def _cmd_run(args) -> int:
    return run_scenario(args.scenario, out_dir=args.out, h=args.h, tol=args.tol, seed=args.seed)


def _cmd_thresholds(args) -> int:
    try:
        sc = load_scenario(args.scenario, h_override=args.h, tol_override=args.tol)
    except ScenarioError as e:
        print(f"config error: {e}")
        return EXIT_CONFIG
    ps = sc.problem
    solver = PLapSolver(sc.domain, ps.p)
    td = solve_torsion(sc.domain, ps.omega, ps.p, tol=sc.tol, solver=solver)
    if not td.converged:
        print(f"{sc.name}: torsion solve failed (residual {_F % td.residual})")
        return 3
    weight = ps.omega1 if ps.form == "two-param" else ps.omega
    ep = principal_eigenpair(sc.domain, weight, ps.p, tol=sc.eigen_tol, solver=solver, torsion=td)
    if not ep.converged:
        print(f"{sc.name}: eigen iteration failed")
        return 3
    tr = threshold_report(ps, td, ep)
    doc = {"scenario": sc.name, "torsion": td.to_json_dict(), "eigen": ep.to_json_dict(),
           "thresholds": tr.to_json_dict()}
    path = write_json(Path(args.out) / f"{sc.name}.thresholds.json", doc)
    print(f"{sc.name}: alpha = {_F % tr.alpha}, mu = {_F % tr.mu}, lambda1 = {_F % tr.lambda1}")
    if tr.beta_max is not None:
        print(f"{sc.name}: beta_max = {_F % tr.beta_max}")
    if tr.lambda_star is not None:
        print(f"{sc.name}: lambda_star = {_F % tr.lambda_star}")
    if tr.lambda_star_box is not None:
        print(f"{sc.name}: lambda_star_box = {_F % tr.lambda_star_box}")
    verdict = "admissible" if tr.admissible else "refused: " + "; ".join(tr.reasons)
    print(f"{sc.name}: {verdict} -> {path}")
    return 0


def _run_one(job) -> tuple[str, int]:
    path, out, h, tol, seed = job
    code = run_scenario(path, out_dir=out, h=h, tol=tol, seed=seed)
    return str(path), code


def _cmd_sweep(args) -> int:
    paths = sorted(Path(args.directory).glob("*.json"))
    if not paths:
        print(f"no scenario files in {args.directory}")
        return EXIT_CONFIG
    jobs = [(p, args.out, args.h, args.tol, args.seed) for p in paths]
    results: list[tuple[str, int]] = []
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    worst = 0
    for path, code in results:
        print(f"[{'ok' if code == 0 else 'exit %d' % code}] {path}")
        worst = max(worst, code)
    summary = {"results": [{"scenario": p, "exit_code": c} for p, c in results], "worst": worst}
    write_json(Path(args.out) / "sweep.summary.json", summary)
    return worst


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plap", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="run one scenario end to end")
    sp.add_argument("scenario", type=str)
    _add_shared(sp)
    sp.set_defaults(fn=_cmd_run)

    sp = sub.add_parser("thresholds", help="compute constants and admissibility only")
    sp.add_argument("scenario", type=str)
    _add_shared(sp)
    sp.set_defaults(fn=_cmd_thresholds)

    sp = sub.add_parser("sweep", help="run every *.json scenario in a directory")
    sp.add_argument("directory", type=str)
    sp.add_argument("--workers", type=int, default=1, help="concurrent scenario workers")
    _add_shared(sp)
    sp.set_defaults(fn=_cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
