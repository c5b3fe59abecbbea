"""Command-line front end.

Subcommands: weights, power, replicate, case-study, simulate, sweep,
heatmap, fwer, bench.  Scalar and vector inputs come from flags
(comma-separated reals); ``--config FILE`` reads ``key = value`` lines
mirroring the flag names, with explicit flags taking precedence.  Output
is CSV to --out or stdout; summary metadata rides along as ``#``-prefixed
comment lines.  Exit codes: 0 success, 2 invalid flags, 3 solver
non-convergence.  REPOWER_THREADS caps simulation parallelism.
"""

from __future__ import annotations

import argparse
import re
import sys
import time

import numpy as np

from . import casestudy, simlab
from .mtp import ProblemSpec
from .power import AlternativeSet, disjunctive_power, marginal_power
from .replication import run_replication
from .solver import (DEFAULT_CONFIG, NoConvergence, SolverConfig,
                     optimal_weights, solve_fixed_point, solve_grid,
                     solve_multistart, uniform_report)
from .replication import estimate_alt_set


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def _emit(lines, out_path):
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows, comments=()):
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return lines


def _parse_vector(text):
    try:
        return np.array([float(tok) for tok in text.split(",") if tok != ""])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad real vector: {text!r}")


def _parse_indices(text):
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad index list: {text!r}")


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    if n < 0 or step <= 0:
        raise ValueError("bad grid bounds/step")
    return [lo + i * step for i in range(n + 1)]


def _solver_cfg(args) -> SolverConfig:
    if getattr(args, "grid_step", None):
        return SolverConfig(grid_step=args.grid_step)
    return DEFAULT_CONFIG


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_weights(args):
    means = args.means
    m = args.m or len(means)
    if m < len(means):
        raise ValueError("--m smaller than the means vector")
    spec = ProblemSpec(m=m, alpha=args.alpha)
    full = np.zeros(m)
    full[: len(means)] = means
    note = ""
    if args.alt:
        idx = np.array(sorted(i - 1 for i in args.alt))
        if np.any(idx < 0) or np.any(idx >= m):
            raise ValueError("--alt indices out of range (1-based)")
        alt = AlternativeSet(indices=idx, means=full[idx])
    else:
        alt = estimate_alt_set(full, spec)
    cfg = _solver_cfg(args)
    if len(alt) == 0:
        report = uniform_report(spec)
        note = "empty alternative set; uniform weights"
    elif args.method == "fixed-point":
        report = solve_fixed_point(alt, spec, cfg)
    elif args.method == "grid":
        report = solve_grid(alt, spec, cfg)
    elif args.method == "multistart":
        report = solve_multistart(alt, spec, cfg)
    else:
        report = optimal_weights(alt, spec, cfg)
    in_alt = np.zeros(m, dtype=bool)
    in_alt[alt.indices] = True
    comments = [
        f"power={_fmt(report.achieved_power)}",
        f"lagrange_c={_fmt(report.lagrange_c)}",
        f"method={report.method}",
        f"converged={_fmt(report.converged)}",
    ]
    if note:
        comments.append(f"note={note}")
    rows = [
        (i + 1, report.weights[i], f"{report.weights[i]:.2f}", in_alt[i])
        for i in range(m)
    ]
    _emit(_csv(["index", "weight", "weight_2dp", "in_alt"], rows, comments),
          args.out)


def cmd_power(args):
    w = args.weights
    means = args.means
    if len(w) != len(means):
        raise ValueError("--means and --weights must have equal length")
    idx = np.flatnonzero(means > 0)
    comments = []
    if idx.size:
        alt = AlternativeSet(indices=idx, means=means[idx])
        comments.append(
            f"disjunctive_power={_fmt(disjunctive_power(alt, w, args.alpha))}")
    else:
        comments.append("disjunctive_power=")
    rows = [
        (i + 1, means[i], w[i], marginal_power(means[i], w[i], args.alpha))
        for i in range(len(means))
    ]
    _emit(_csv(["index", "theta", "weight", "marginal_power"], rows, comments),
          args.out)


def cmd_replicate(args):
    if len(args.z1) != len(args.z2):
        raise ValueError("--z1 and --z2 must have equal length")
    spec = ProblemSpec(m=len(args.z1), alpha=args.alpha)
    res = run_replication(args.z1, args.z2, spec, _solver_cfg(args))
    comments = [f"method={res.solve.method}",
                f"converged={_fmt(res.solve.converged)}"]
    rows = [
        (i + 1, args.z1[i], args.z2[i], res.weights[i],
         res.trial2_adjusted_p[i], res.trial1_rejections[i],
         res.trial2_rejections[i], res.overall_rejections[i])
        for i in range(spec.m)
    ]
    _emit(_csv(["index", "z1", "z2", "weight", "trial2_adjusted_p",
                "reject_trial1", "reject_trial2", "reject_overall"],
               rows, comments), args.out)


def cmd_case_study(args):
    rows_out = []
    for row in casestudy.run_case_study(hypothetical=args.hypothetical,
                                        cfg=_solver_cfg(args)):
        for i in range(len(row.trial1_means)):
            rows_out.append((
                row.name, i + 1, row.trial1_means[i], row.weights[i],
                row.original_adjusted_p[i], row.new_adjusted_p[i],
                row.overall_weighted[i], row.overall_unweighted[i],
            ))
    _emit(_csv(["analysis", "index", "trial1_mean", "weight",
                "original_adj_p", "new_adj_p", "overall_weighted",
                "overall_unweighted"], rows_out), args.out)


def _sim_rows(prefix, summary, methods, m):
    rows = []
    for method in methods:
        dp = summary.dpos[method] if summary.dpos else None
        f1 = summary.fwer[method]["trial1"]
        f2 = summary.fwer[method]["trial2"]
        rows.append(
            tuple(prefix) + (method,
                             dp.value if dp else None,
                             dp.se if dp else None)
            + tuple(e.value for e in summary.mpos[method])
            + (f1.value if f1 else None, f2.value if f2 else None))
    return rows


def cmd_simulate(args):
    s = simlab.ScenarioSpec(
        theta1=tuple(args.theta),
        theta2=tuple(args.theta2) if args.theta2 is not None else None,
        alpha=args.alpha, reps=args.reps, seed=args.seed)
    summary = simlab.run_scenario(s)
    m = s.m
    header = ([f"theta_{i+1}" for i in range(m)]
              + ["method", "dpos", "dpos_se"]
              + [f"mpos_{i+1}" for i in range(m)] + ["fwer1", "fwer2"])
    rows = _sim_rows(s.theta1, summary, simlab.METHODS, m)
    _emit(_csv(header, rows), args.out)


def cmd_sweep(args):
    fam = simlab.get_family(args.family)
    base = simlab.ScenarioSpec(theta1=(0.0,) * fam.m, alpha=args.alpha,
                               reps=args.reps, seed=args.seed)
    grid = _grid(args.start, args.stop, args.step)
    m = fam.m
    header = (["theta", "method", "dpos", "dpos_se"]
              + [f"mpos_{i+1}" for i in range(m)] + ["fwer1", "fwer2"])
    rows = []
    for th, summary in simlab.sweep_curve(args.family, grid, base):
        rows.extend(_sim_rows((th,), summary, simlab.METHODS, m))
    _emit(_csv(header, rows), args.out)


def cmd_heatmap(args):
    f1 = simlab.get_family(args.family1)
    f2 = simlab.get_family(args.family2)
    if f1.m != f2.m:
        raise ValueError("families must have matching dimension")
    base = simlab.ScenarioSpec(theta1=(0.0,) * f1.m, alpha=args.alpha,
                               reps=args.reps, seed=args.seed)
    g1 = _grid(args.start, args.stop, args.step)
    g2 = _grid(args.start2 if args.start2 is not None else args.start,
               args.stop2 if args.stop2 is not None else args.stop,
               args.step2 if args.step2 is not None else args.step)
    m = f1.m
    header = (["theta", "theta_prime", "diff_dpos"]
              + [f"diff_mpos_{i+1}" for i in range(m)])
    rows = []
    for row in simlab.sweep_heatmap(args.family1, args.family2, g1, g2, base):
        for th, th2, summary in row:
            diff_d = (summary.dpos["weighted"].value
                      - summary.dpos["unweighted"].value
                      if summary.dpos else None)
            diffs = [summary.mpos["weighted"][i].value
                     - summary.mpos["unweighted"][i].value for i in range(m)]
            rows.append((th, th2, diff_d, *diffs))
    _emit(_csv(header, rows), args.out)


def cmd_fwer(args):
    s = simlab.ScenarioSpec(
        theta1=tuple(args.theta),
        theta2=tuple(args.theta2) if args.theta2 is not None else None,
        alpha=args.alpha, reps=args.reps, seed=args.seed)
    fwer = simlab.fwer_check(s)
    rows = []
    for method in simlab.METHODS:
        for trial in ("trial1", "trial2"):
            est = fwer[method][trial]
            rows.append((method, trial,
                         est.value if est else None,
                         est.se if est else None))
    _emit(_csv(["method", "trial", "fwer", "se"], rows), args.out)


def cmd_bench(args):
    m = args.m
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    bound = 6.0 if m == 2 else 3.0
    spec = ProblemSpec(m=m, alpha=args.alpha)
    header = ["method", "mean_time_s", "frac_fp_power_ge", "max_power_deficit"]
    if m == 1:
        _emit(_csv(header, [("fixed_point", 0.0, 1.0, 0.0)],
                   ["note=single hypothesis: weight 1 for every method"]),
              args.out)
        return
    idx = np.arange(m)
    methods = {"grid": solve_grid} if m <= 3 else {}
    methods["multistart_ascent"] = solve_multistart
    timings = {"fixed_point": 0.0, **{k: 0.0 for k in methods}}
    frac_ge = {k: 0 for k in methods}
    deficit = {k: 0.0 for k in methods}
    for _ in range(args.instances):
        means = rng.uniform(0.0, bound, size=m)
        alt = AlternativeSet(indices=idx, means=means)
        t0 = time.perf_counter()
        fp = solve_fixed_point(alt, spec)
        timings["fixed_point"] += time.perf_counter() - t0
        for name, fn in methods.items():
            t0 = time.perf_counter()
            other = fn(alt, spec)
            timings[name] += time.perf_counter() - t0
            if fp.achieved_power >= other.achieved_power - 1e-9:
                frac_ge[name] += 1
            deficit[name] = max(deficit[name],
                                other.achieved_power - fp.achieved_power)
    rows = [("fixed_point", timings["fixed_point"] / args.instances, 1.0, 0.0)]
    for name in methods:
        rows.append((name, timings[name] / args.instances,
                     frac_ge[name] / args.instances, deficit[name]))
    _emit(_csv(header, rows,
               [f"m={m}", f"instances={args.instances}",
                f"mean_bound={bound}", "timings are informational"]),
          args.out)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser():
    p = argparse.ArgumentParser(
        prog="repower",
        description="Optimal weighted Bonferroni weights and two-trial "
                    "probability-of-success experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--out", default=None)
        sp.add_argument("--grid-step", dest="grid_step", type=float,
                        default=None)

    sp = sub.add_parser("weights", help="solve optimal weights")
    sp.add_argument("--means", type=_parse_vector, required=True)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--alt", type=_parse_indices, default=None,
                    help="force the alternative set (1-based indices)")
    sp.add_argument("--method", choices=["auto", "fixed-point", "grid",
                                         "multistart"], default="auto")
    common(sp)
    sp.set_defaults(fn=cmd_weights)

    sp = sub.add_parser("power", help="closed-form power at given weights")
    sp.add_argument("--means", type=_parse_vector, required=True)
    sp.add_argument("--weights", type=_parse_vector, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_power)

    sp = sub.add_parser("replicate", help="run the two-trial pipeline")
    sp.add_argument("--z1", type=_parse_vector, required=True)
    sp.add_argument("--z2", type=_parse_vector, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_replicate)

    sp = sub.add_parser("case-study", help="bundled two-trial case study")
    sp.add_argument("--hypothetical", action="store_true")
    common(sp)
    sp.set_defaults(fn=cmd_case_study)

    sp = sub.add_parser("simulate", help="Monte Carlo for one scenario")
    sp.add_argument("--theta", type=_parse_vector, required=True)
    sp.add_argument("--theta2", type=_parse_vector, default=None)
    sp.add_argument("--reps", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("sweep", help="effect-size sweep for a family")
    sp.add_argument("--family", required=True)
    sp.add_argument("--from", dest="start", type=float, required=True)
    sp.add_argument("--to", dest="stop", type=float, required=True)
    sp.add_argument("--step", type=float, required=True)
    sp.add_argument("--reps", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("heatmap", help="robustness grid over two families")
    sp.add_argument("--family1", required=True)
    sp.add_argument("--family2", required=True)
    sp.add_argument("--from", dest="start", type=float, default=0.0)
    sp.add_argument("--to", dest="stop", type=float, default=6.0)
    sp.add_argument("--step", type=float, default=0.25)
    sp.add_argument("--from2", dest="start2", type=float, default=None)
    sp.add_argument("--to2", dest="stop2", type=float, default=None)
    sp.add_argument("--step2", type=float, default=None)
    sp.add_argument("--reps", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(fn=cmd_heatmap)

    sp = sub.add_parser("fwer", help="familywise error rate check")
    sp.add_argument("--theta", type=_parse_vector, required=True)
    sp.add_argument("--theta2", type=_parse_vector, default=None)
    sp.add_argument("--reps", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(fn=cmd_fwer)

    sp = sub.add_parser("bench", help="solver method comparison")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--instances", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(fn=cmd_bench)

    return p


def _expand_config(argv):
    """Splice ``key = value`` file entries in as flags (flags win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        raise SystemExit(2)
    rest = argv[:i] + argv[i + 2:]
    tokens = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            tokens += [f"--{key.strip().replace('_', '-')}", value.strip()]
    # config tokens go right after the subcommand so explicit flags override
    return rest[:1] + tokens + rest[1:]


def _join_negative_vectors(argv):
    """Turn ``--means -1,-1`` into ``--means=-1,-1``.

    argparse treats a leading ``-`` followed by anything but a plain
    number as an unknown option, which would reject negative vector
    entries given as a separate token.
    """
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and re.match(r"^-\d", argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        argv = _join_negative_vectors(_expand_config(argv))
    except OSError as err:
        print(f"repower: {err}", file=sys.stderr)
        return 2
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except NoConvergence as err:
        print(f"repower: {err}", file=sys.stderr)
        return 3
    except (ValueError, FileNotFoundError) as err:
        print(f"repower: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
