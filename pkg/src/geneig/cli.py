"""Command-line front end: problem I/O, solves, certification, comparison.

Subcommands:
  gen-truss   write a ground-structure problem file (defaults: the desk
              reference instance)
  solve       run one algorithm on a problem file, write trace/design
  bisect      certify the global optimum to an interval, write the witness
  compare     run several algorithms, tabulate gaps against the certified
              optimum, emit plot data and figures

Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, report
from .feasible import InfeasibleSet, feasible_from_dict
from .linalg import NoConvergence, NotPositiveDefinite
from .pencil import DimensionMismatch, pencil_from_dict, spectrum_at
from .smoothing import InvalidL
from .solvers import (
    BracketInvalid,
    SolverConfig,
    bisect,
    normalize_algorithm,
    solve,
    write_trace_csv,
)
from .truss import (
    DofOutOfRange,
    TrussProblem,
    UnderConstrained,
    design_to_csv,
    design_to_svg,
    generate_grid,
    save_truss_json,
    truss_from_dict,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3

_INPUT_ERRORS = (
    UnderConstrained,
    DofOutOfRange,
    InfeasibleSet,
    DimensionMismatch,
    InvalidL,
    ValueError,
    KeyError,
    TypeError,
    OSError,
    json.JSONDecodeError,
)


def load_problem(path):
    """Read a problem file; returns (kind, pencil, feasible_set, truss_problem).

    The "kind" field discriminates: "pencil" files carry raw pencil and
    feasible-set objects, "truss" files carry geometry that is assembled
    here. truss_problem is None for pencil files.
    """
    with open(path) as fh:
        data = json.load(fh)
    kind = data.get("kind")
    if kind == "pencil":
        pencil = pencil_from_dict(data["pencil"])
        S = feasible_from_dict(data["feasible"])
        if S.m != pencil.m:
            raise DimensionMismatch(
                f"feasible set has {S.m} coordinates, pencil has {pencil.m}"
            )
        return kind, pencil, S, None
    if kind == "truss":
        problem = truss_from_dict(data)
        _, pencil, S = problem.build()
        return kind, pencil, S, problem
    raise ValueError('problem file must declare "kind": "pencil" or "truss"')


def _parse_supports(text):
    text = text.strip()
    if not text:
        return []
    if text in ("left", "right", "bottom", "top"):
        return text
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_masses(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        node, _, mass = tok.partition(":")
        if not mass:
            raise ValueError(f"--masses entries are node:mass, got {tok!r}")
        out.append((int(node), float(mass)))
    return out


def _parse_alpha0(text):
    """--alpha0 accepts "auto", one float, or per-algorithm name=value pairs."""
    text = text.strip()
    if text == "auto":
        return None
    if "=" not in text:
        return float(text)
    table = {}
    for tok in text.split(","):
        name, _, val = tok.partition("=")
        if not val:
            raise ValueError(f"--alpha0 entries are algorithm=value, got {tok!r}")
        table[normalize_algorithm(name)] = float(val)
    return table


def _alpha0_for(parsed, algorithm):
    if isinstance(parsed, dict):
        return parsed.get(algorithm)
    return parsed


def cmd_gen_truss(args) -> int:
    supports = _parse_supports(args.supports)
    masses = _parse_masses(args.masses)
    gs, point_masses = generate_grid(
        args.gx, args.gy, args.spacing, fixed_nodes=supports, mass_nodes=masses
    )
    problem = TrussProblem(gs, args.E, args.rho, point_masses, args.V0, args.xmin)
    save_truss_json(problem, args.out_path)
    print(f"wrote {args.out_path}: {gs.m} members, {gs.n} free dofs")
    return EXIT_OK


def _export_design(prefix, problem, x, want_figure=True):
    """Write design CSV + SVG (+ PNG) sharing one path prefix."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = prefix.with_suffix(".csv")
    design_to_csv(csv_path, x)
    written.append(csv_path)
    svg_path = prefix.with_suffix(".svg")
    design_to_svg(svg_path, problem.structure, x, problem.x_min)
    written.append(svg_path)
    if want_figure:
        png_path = prefix.with_suffix(".png")
        report.design_figure(png_path, problem.structure, x, problem.x_min)
        written.append(png_path)
    return written


def cmd_solve(args) -> int:
    kind, pencil, S, problem = load_problem(args.problem)
    algorithm = normalize_algorithm(args.algorithm)
    config = SolverConfig(
        algorithm=algorithm,
        alpha0=_alpha0_for(_parse_alpha0(args.alpha0), algorithm),
        mu0=args.mu0,
        max_iters=args.iters,
        inexact_l=args.inexact_l,
        seed=args.seed,
    )
    start = time.perf_counter()
    trace = solve(pencil, S, config)
    seconds = time.perf_counter() - start

    if args.trace:
        Path(args.trace).parent.mkdir(parents=True, exist_ok=True)
        write_trace_csv(trace, args.trace)
    if args.design:
        if kind == "truss":
            _export_design(args.design, problem, trace.best_x)
        else:
            print("note: --design applies to truss problems only", file=sys.stderr)
    print(f"{algorithm},{trace.best_objective:.17g},{trace.iterations},{seconds:.3f}")
    return EXIT_OK


def cmd_bisect(args) -> int:
    kind, pencil, S, problem = load_problem(args.problem)
    interval = None
    if args.interval is not None:
        lo, hi = args.interval
        if not lo < hi:
            raise BracketInvalid(f"interval [{lo:g}, {hi:g}] is not increasing")
        interval = (lo, hi)
    config = SolverConfig(
        algorithm="bisect",
        bisect_interval=interval,
        bisect_tol=args.tol,
        inner_max_iters=args.inner_iters,
        seed=args.seed,
    )
    result = bisect(pencil, S, config)
    lo, hi = result.interval
    if result.inconclusive:
        print(
            f"InnerInconclusive: certified [{lo:.17g}, {hi:.17g}] "
            f"(width {result.width:.6g}), inner solves could not narrow further"
        )
    else:
        print(f"[{lo:.17g}, {hi:.17g}] width={result.width:.6g}")

    witness = result.witness
    prefix = Path(args.witness)
    if kind == "truss":
        _export_design(prefix, problem, witness)
    else:
        prefix.parent.mkdir(parents=True, exist_ok=True)
        path = prefix.with_suffix(".csv")
        with open(path, "w") as fh:
            fh.write("coordinate,value\n")
            for e, val in enumerate(witness):
                fh.write(f"{e},{val:.17g}\n")
    return EXIT_OK


def _run_one(pencil, S, config):
    start = time.perf_counter()
    trace = solve(pencil, S, config)
    return trace, time.perf_counter() - start


def cmd_compare(args) -> int:
    kind, pencil, S, problem = load_problem(args.problem)
    algorithms = [normalize_algorithm(a) for a in args.algorithms.split(",") if a.strip()]
    if not algorithms:
        raise ValueError("--algorithms must name at least one algorithm")
    alpha0 = _parse_alpha0(args.alpha0)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.ref_fstar is not None:
        reference = {"source": "supplied", "value": args.ref_fstar}
        ref = args.ref_fstar
    else:
        bis_config = SolverConfig(
            algorithm="bisect", inner_max_iters=args.inner_iters, seed=args.seed
        )
        result = bisect(pencil, S, bis_config)
        # the interval's lower end under-estimates f*, keeping gaps >= 0
        ref = result.interval[0]
        reference = {
            "source": "bisect",
            "value": ref,
            "interval": list(result.interval),
            "inconclusive": result.inconclusive,
        }

    configs = {
        name: SolverConfig(
            algorithm=name,
            alpha0=_alpha0_for(alpha0, name),
            mu0=args.mu0,
            max_iters=args.iters,
            inexact_l=args.inexact_l,
            seed=args.seed,
        )
        for name in algorithms
    }
    env_cap = os.environ.get("GENEIG_THREADS", "")
    workers = int(env_cap) if env_cap else (os.cpu_count() or 1)
    workers = max(1, min(workers, len(algorithms)))
    runs = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            name: pool.submit(_run_one, pencil, S, configs[name])
            for name in algorithms
        }
        for name, fut in futures.items():
            try:
                runs[name] = fut.result()
            except (NotPositiveDefinite, NoConvergence) as exc:
                runs[name] = exc
                where = getattr(exc, "iteration", None)
                at = f" at iteration {where}" if where is not None else ""
                print(f"{name}: {type(exc).__name__}{at}: {exc}", file=sys.stderr)

    outputs = []
    manifest_runs = []
    gap_series = {}
    summary_rows = []
    for name in algorithms:
        entry = {"algorithm": name, "mu0": args.mu0, "iters": args.iters,
                 "alpha0": _alpha0_for(alpha0, name), "inexact_l": args.inexact_l}
        run = runs[name]
        if isinstance(run, Exception):
            entry["status"] = "error"
            entry["error"] = f"{type(run).__name__}: {run}"
            manifest_runs.append(entry)
            continue
        trace, seconds = run
        trace_path = outdir / f"trace_{name}.csv"
        write_trace_csv(trace, trace_path)
        outputs.append(trace_path)
        files = [str(trace_path)]
        if kind == "truss":
            design_files = _export_design(
                outdir / f"design_{name}", problem, trace.best_x
            )
            outputs.extend(design_files)
            files.extend(str(p) for p in design_files)
        top = spectrum_at(pencil, trace.best_x).decomposition.eigenvalues
        lam = [float(v) for v in top[: min(3, top.size)]]
        lam += [float("nan")] * (3 - len(lam))
        gap_series[name] = trace.best_f - ref
        summary_rows.append(
            (name, trace.best_objective, trace.best_objective - ref, *lam)
        )
        entry.update({"status": "ok", "best_f": trace.best_objective,
                      "seconds": seconds, "outputs": files})
        manifest_runs.append(entry)

    succeeded = [n for n in algorithms if not isinstance(runs[n], Exception)]
    summary_path = outdir / "summary.csv"
    with open(summary_path, "w") as fh:
        fh.write("algorithm,best_f,gap_to_bisect,lambda1,lambda2,lambda3\n")
        for name, best, gap, l1, l2, l3 in summary_rows:
            fh.write(f"{name},{best:.17g},{gap:.17g},{l1:.17g},{l2:.17g},{l3:.17g}\n")
    outputs.append(summary_path)

    if gap_series:
        gaps_path = outdir / "gaps.csv"
        with open(gaps_path, "w") as fh:
            fh.write("k," + ",".join(succeeded) + "\n")
            length = max(s.size for s in gap_series.values())
            for k in range(length):
                cells = [
                    f"{gap_series[n][k]:.17g}" if k < gap_series[n].size else ""
                    for n in succeeded
                ]
                fh.write(f"{k}," + ",".join(cells) + "\n")
        outputs.append(gaps_path)
        fig_path = outdir / "convergence.png"
        report.convergence_figure(
            fig_path, gap_series, ylabel="best-so-far gap to certified optimum"
        )
        outputs.append(fig_path)

    manifest = {
        "version": __version__,
        "problem": str(args.problem),
        "kind": kind,
        "seed": args.seed,
        "reference": reference,
        "workers": workers,
        "runs": manifest_runs,
        "outputs": [str(p) for p in outputs],
    }
    manifest_path = outdir / "manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    for name, best, gap, *_ in summary_rows:
        print(f"{name},{best:.17g},{gap:.17g}")
    if len(succeeded) < len(algorithms):
        return EXIT_SOLVER
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geneig",
        description="Minimize the largest generalized eigenvalue of an affine "
        "symmetric pencil over a volume-capped box.",
    )
    parser.add_argument("--version", action="version", version=f"geneig {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-truss", help="write a ground-structure problem file")
    gen.add_argument("--gx", type=int, default=3)
    gen.add_argument("--gy", type=int, default=3)
    gen.add_argument("--spacing", type=float, default=1.0)
    gen.add_argument("--supports", default="left",
                     help='edge name or comma-separated node indices ("" for none)')
    gen.add_argument("--masses", default="2:1e7",
                     help="comma-separated node:mass pairs (kg)")
    gen.add_argument("--E", type=float, default=200e9)
    gen.add_argument("--rho", type=float, default=7.86e3)
    gen.add_argument("--V0", type=float, default=0.1)
    gen.add_argument("--xmin", type=float, default=1e-8)
    gen.add_argument("--out-path", default="truss.json")
    gen.add_argument("--seed", type=int, default=42)
    gen.set_defaults(func=cmd_gen_truss)

    slv = sub.add_parser("solve", help="run one algorithm on a problem file")
    slv.add_argument("problem")
    slv.add_argument("--algorithm", default="sapg",
                     choices=["spg", "sapg", "subgrad", "spg-zc"])
    slv.add_argument("--mu0", type=float, default=10.0)
    slv.add_argument("--alpha0", default="auto",
                     help='"auto", a float, or per-algorithm name=value pairs')
    slv.add_argument("--iters", type=int, default=3000)
    slv.add_argument("--inexact-l", type=int, default=None)
    slv.add_argument("--trace", default=None, help="write the iteration trace CSV here")
    slv.add_argument("--design", default=None,
                     help="path prefix for design export (truss problems)")
    slv.add_argument("--seed", type=int, default=42)
    slv.set_defaults(func=cmd_solve)

    bis = sub.add_parser("bisect", help="certify the optimum to an interval")
    bis.add_argument("problem")
    bis.add_argument("--interval", type=float, nargs=2, default=None,
                     metavar=("LO", "HI"))
    bis.add_argument("--tol", type=float, default=None)
    bis.add_argument("--inner-iters", type=int, default=5000)
    bis.add_argument("--witness", default="witness",
                     help="path prefix for the witness design")
    bis.add_argument("--seed", type=int, default=42)
    bis.set_defaults(func=cmd_bisect)

    cmp_ = sub.add_parser("compare", help="run several algorithms and tabulate gaps")
    cmp_.add_argument("problem")
    cmp_.add_argument("--algorithms", default="sapg,spg,subgrad")
    cmp_.add_argument("--iters", type=int, default=3000)
    cmp_.add_argument("--mu0", type=float, default=10.0)
    cmp_.add_argument("--alpha0", default="auto",
                      help='"auto", a float, or per-algorithm name=value pairs')
    cmp_.add_argument("--inexact-l", type=int, default=None)
    cmp_.add_argument("--inner-iters", type=int, default=5000)
    cmp_.add_argument("--ref-fstar", type=float, default=None,
                      help="skip bisection and measure gaps against this value")
    cmp_.add_argument("--out", default="compare_out")
    cmp_.add_argument("--seed", type=int, default=42)
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BracketInvalid as exc:
        print(f"BracketInvalid: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotPositiveDefinite, NoConvergence) as exc:
        where = getattr(exc, "iteration", None)
        at = f" at iteration {where}" if where is not None else ""
        print(f"{type(exc).__name__}{at}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except _INPUT_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
