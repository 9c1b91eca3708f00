"""Command-line front end: single runs, convergence studies, catalogue.

Exit codes: 0 success, 1 runtime divergence, 2 usage or configuration
error.  Output artifacts are CSV for curves and tables, JSON for manifests
and 2-D fields; the default output directory can be set through the
HJKERNEL_OUT environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import problems as prob
from . import solver as solv
from .errors import DivergenceError, HJKernelError
from .weno import dump_diagnostics_csv


def _out_dir(args):
    out = args.out or os.environ.get("HJKERNEL_OUT", ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _lookup(name):
    try:
        return prob.get_problem(name)
    except KeyError:
        names = ", ".join(p.name for p in prob.catalogue())
        raise SystemExit(
            f"error: unknown problem {name!r}; available: {names}"
        ) from None


def _with_variant(problem, variant):
    if variant is None:
        return problem
    for vname, fn in problem.alt_initials:
        if vname == variant:
            from dataclasses import replace
            return replace(problem, initial=fn, exact=None, alt_initials=())
    avail = ", ".join(v for v, _ in problem.alt_initials) or "(none)"
    raise SystemExit(
        f"error: problem {problem.name} has no variant {variant!r}; "
        f"available: {avail}"
    )


def cmd_run(args):
    problem = _with_variant(_lookup(args.problem), args.variant)
    out = _out_dir(args)
    result = solv.run(
        problem, args.n, cfl=args.cfl, order=args.order, beta=args.beta,
        lam=getattr(args, "lambda"), seed=args.seed, t_final=args.t_final,
    )
    formats = set(args.format.split(","))
    written = []
    if problem.dimension == 1:
        if "csv" in formats:
            path = out / "solution.csv"
            bd = getattr(result.solver, "last_derivatives", None)
            solv.write_snapshot_1d(path, result.grid, result.state, bd)
            written.append(str(path))
    else:
        if "json" in formats or "csv" in formats:
            path = out / "solution.json"
            solv.write_snapshot_2d(path, result.grid, result.state,
                                   mask=result.mask)
            written.append(str(path))
    if args.diagnostics:
        path = out / "weno_diagnostics.csv"
        _dump_diagnostics(result, path)
        written.append(str(path))
    result.manifest["outputs"] = written
    mpath = out / "manifest.json"
    solv.write_manifest(mpath, result.manifest)
    written.append(str(mpath))
    print(f"{problem.name}: n={args.n} order={args.order} cfl={args.cfl} "
          f"t={result.state.time:.6g} steps={result.state.step_count} "
          f"wall={result.wall_time:.2f}s")
    for w in written:
        print(f"  wrote {w}")
    return 0


def _dump_diagnostics(result, path):
    solver = result.solver
    state = result.state
    if hasattr(solver, "grid") and hasattr(solver.grid, "physical_nodes"):
        lk = solver._kernel(solver.beta / (solver.wave_speed(state.field)
                                           * solver.metric_max
                                           * result.dt_history[-1]))
        lk.biased_derivatives(state.field, collect=True)
        dump_diagnostics_csv(path, lk.quad)
    else:
        # 2-D: dump the x-direction pass (first line of the batch).
        kern = None
        for (_, alpha), lk in solver._cache._store.items():
            kern = lk
            break
        if kern is None:
            raise HJKernelError("no kernel available for diagnostics")
        kern.biased_derivatives(np.asarray(state.field, dtype=float),
                                collect=True)
        dump_diagnostics_csv(path, kern.quad)


def cmd_converge(args):
    problem = _with_variant(_lookup(args.problem), args.variant)
    res = [int(s) for s in args.resolutions.split(",")]
    if len(res) < 2:
        raise SystemExit("error: need at least two resolutions")
    out = _out_dir(args)
    try:
        report = prob.convergence_study(
            problem, args.order, args.cfl, res, seed=args.seed,
            beta=args.beta, lam=getattr(args, "lambda"),
            threads=args.threads,
        )
    except ValueError as exc:
        raise SystemExit(f"error: {exc}") from None
    print(f"{problem.name}: order k={args.order}, CFL={args.cfl}")
    print(report.format_table())
    formats = set(args.format.split(","))
    if "csv" in formats:
        path = out / "convergence.csv"
        report.to_csv(path)
        print(f"  wrote {path}")
    if "json" in formats:
        path = out / "convergence.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_dict(), fh, indent=2)
        print(f"  wrote {path}")
    return 0


def cmd_list(args):
    entries = prob.catalogue()
    if args.dim:
        entries = [p for p in entries if p.dimension == args.dim]
    if args.json:
        doc = [
            {
                "name": p.name, "dim": p.dimension, "bc": p.bc,
                "t_final": p.t_final, "exact": p.exact is not None,
                "variants": [v for v, _ in p.alt_initials],
            }
            for p in entries
        ]
        print(json.dumps(doc, indent=2))
        return 0
    for p in entries:
        exact = "exact" if p.exact is not None else (
            "reference" if p.reference_recipe else "qualitative")
        print(f"{p.name:<22} dim={p.dimension} bc={p.bc:<9} "
              f"T={p.t_final:<9.6g} {exact}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="hjkernel",
        description="Unconditionally stable kernel/WENO Hamilton-Jacobi solver",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--problem", required=True)
        p.add_argument("--cfl", type=float, default=0.5)
        p.add_argument("--order", type=int, default=3, choices=(1, 2, 3))
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--lambda", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--format", default="csv,json")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--variant", default=None)

    pr = sub.add_parser("run", help="run one simulation")
    common(pr)
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--t-final", type=float, default=None)
    pr.add_argument("--diagnostics", action="store_true")
    pr.set_defaults(func=cmd_run)

    pc = sub.add_parser("converge", help="run a convergence study")
    common(pc)
    pc.add_argument("--resolutions", required=True,
                    help="comma-separated, each double the previous")
    pc.set_defaults(func=cmd_converge)

    pl = sub.add_parser("list", help="list the problem catalogue")
    pl.add_argument("--json", action="store_true")
    pl.add_argument("--dim", type=int, default=None)
    pl.set_defaults(func=cmd_list)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SystemExit as exc:
        msg = str(exc)
        if msg:
            print(msg, file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"divergence: {exc} (step {exc.step}, t={exc.time})",
              file=sys.stderr)
        return 1
    except HJKernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
