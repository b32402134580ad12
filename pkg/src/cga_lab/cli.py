"""Command-line front end.

Subcommands: run (single traced run), sweep --kind {upper|lower|nlogn},
verify (exact inequality suite), parallel (parameter-less scheduler), demo
(counterexamples, potential drift), oracle (ad-hoc exact queries).
Exit codes: 0 success, 1 verification violation, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments, meta, oracle, verify
from .engine import make_params, run_cga
from .experiments import ExperimentSpec, default_spec
from .fitness import jump, one_max, plateau_subjump


class ConfigError(Exception):
    pass


def _fitness_from_args(args):
    if args.fitness == "onemax":
        return one_max(args.n)
    if args.fitness == "jump":
        return jump(args.n, args.k)
    if args.fitness == "plateau":
        return plateau_subjump(args.n, args.k)
    raise ConfigError(f"unknown fitness {args.fitness!r}")


def _out_dir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _load_spec(args, kind: str) -> ExperimentSpec:
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
            spec = ExperimentSpec.from_json_dict(doc)
        except (OSError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad config {args.config}: {exc}") from exc
        if spec.kind != kind:
            raise ConfigError(f"config kind {spec.kind!r} does not match {kind!r}")
    else:
        spec = default_spec(kind, quick=args.quick)
    if args.seed is not None:
        spec.master_seed = args.seed
    return spec


def cmd_run(args) -> int:
    params = make_params(args.n, args.mu, "round_up",
                         max_iterations=args.budget,
                         seed=args.seed if args.seed is not None else 0,
                         record_trace=args.trace is not None,
                         trace_stride=args.stride)
    if params.mu != args.mu:
        print(f"note: mu rounded up to the nearest valid value {params.mu}")
    fitness = _fitness_from_args(args)
    res = run_cga(params, fitness, target_d=args.target_d,
                  potential_c=args.potential_c)
    print(f"hit_optimum={res.hit_optimum} reason={res.reason} "
          f"iterations={res.iterations_used} samples={res.samples_used} "
          f"final_D={res.final_D:.6g}")
    if args.trace is not None:
        res.trace.to_jsonl(args.trace)
        print(f"trace written to {args.trace} ({len(res.trace)} records)")
    return 0


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    kind = {"upper": "upper_scaling", "lower": "lower_exponential",
            "nlogn": "nlogn_floor"}[args.kind]
    spec = _load_spec(args, kind)
    if args.kind == "upper":
        rep = experiments.run_upper_scaling(spec, threads=args.threads)
        path = os.path.join(out, "upper.csv")
        experiments.write_cells_csv(rep.cells, path)
        for c in rep.cells:
            print(f"n={c.n} mu={c.mu} success={c.success_rate:.3f} "
                  f"median={c.median_iterations:.0f}")
        print(f"normalized-median spread: {rep.spread:.3f}")
    elif args.kind == "lower":
        rep = experiments.run_lower_exponential(spec, threads=args.threads)
        path = os.path.join(out, "lower.csv")
        experiments.write_cells_csv(rep.cells, path)
        for k in sorted(rep.best_by_k):
            print(f"k={k} best-over-mu median={rep.best_by_k[k].median_iterations:.0f}")
        print(f"log-median slope={rep.slope:.4f} p={rep.p_value:.4g} "
              f"monotone={rep.monotone}")
    else:
        rep = experiments.run_nlogn_floor(spec, threads=args.threads)
        path = os.path.join(out, "nlogn.csv")
        experiments.write_cells_csv(rep.rows, path)
        for c in rep.cells:
            print(f"n={c.n} mu={c.mu} median={c.median_iterations:.0f} "
                  f"ratio={rep.ratios[c.n]:.3f}")
        print(f"monotone={rep.monotone} floor_ok={rep.floor_ok} mu_arm_ok={rep.mu_arm_ok}")
    print(f"csv written to {path}")
    return 0


def cmd_verify(args) -> int:
    out = _out_dir(args)
    path = os.path.join(out, "verify.csv")
    rows, failures = verify.run_verify_suite(
        cases=args.cases, seed=args.seed if args.seed is not None else verify.DEFAULT_SEED,
        out_csv=path)
    by_lemma: dict[str, int] = {}
    for r in rows:
        by_lemma[r.lemma] = by_lemma.get(r.lemma, 0) + 1
    for lemma, count in by_lemma.items():
        bad = sum(1 for r in rows if r.lemma == lemma and not r.holds)
        print(f"{lemma}: {count} cases, {bad} violations")
    print(f"csv written to {path}")
    if failures:
        worst = next(r for r in rows if not r.holds)
        print(f"VIOLATION: {worst.lemma} {worst.case_id} lhs={worst.lhs} rhs={worst.rhs}",
              file=sys.stderr)
        return 1
    return 0


def cmd_parallel(args) -> int:
    out = _out_dir(args)
    fitness = _fitness_from_args(args)
    res = meta.parallel_run(fitness, args.n, args.cap,
                            args.seed if args.seed is not None else 0)
    path = os.path.join(out, "parallel_log.csv")
    meta.write_process_log_csv(res.log, path)
    print(f"success={res.success} winner_mu={res.winner_mu} "
          f"total_budget={res.total_budget} rounds={res.rounds_completed}")
    print(f"log written to {path}")
    return 0


def cmd_demo(args) -> int:
    out = _out_dir(args)
    if args.kind == "domination":
        spec = _load_spec(args, "domination_demo")
        rep = experiments.run_domination_demo(spec, threads=args.threads)
        path = os.path.join(out, "domination.csv")
        experiments.write_domination_csv(rep, path)
        f, g = rep.mc_subjump, rep.mc_onemax
        print(f"E[d] subjump step: {f.mean_d:.6f} CI [{f.ci_lo:.6f}, {f.ci_hi:.6f}]")
        print(f"E[d] onemax step:  {g.mean_d:.6f} CI [{g.ci_lo:.6f}, {g.ci_hi:.6f}]")
        print(f"separated={rep.separated}")
        print(f"exact n={rep.exact_n}: Pr[up|f]={rep.prob_up_f:.6f} "
              f"Pr[up|g]={rep.prob_up_g:.6f} direction_ok={rep.exact_direction_ok}")
    else:
        spec = _load_spec(args, "potential_trace")
        rep = experiments.run_potential_trace(spec, threads=args.threads)
        path = os.path.join(out, "potential.csv")
        experiments.write_potential_csv(rep, path)
        for b in rep.bins:
            print(f"D in [{b.d_bin},{b.d_bin + 1}): count={b.count} "
                  f"mean_dY={b.mean_dY:.5f} se={b.se_dY:.5f}")
        print(f"holds={rep.holds} (bound {rep.bound})")
    print(f"csv written to {path}")
    return 0


def _parse_floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",") if v.strip() != ""])


def cmd_oracle(args) -> int:
    if args.op == "pmf":
        print(json.dumps(list(oracle.poisson_binomial_pmf(_parse_floats(args.f)).probs)))
    elif args.op == "point":
        bits = np.array([int(b) for b in args.x], dtype=np.uint8)
        print(oracle.prob_sample_point(_parse_floats(args.f), bits))
    elif args.op == "distinct":
        print(oracle.prob_distinct_norms(_parse_floats(args.f)))
    elif args.op == "gap":
        print(oracle.gap_probability(_parse_floats(args.f), args.k))
    elif args.op == "loptub":
        bits = np.array([int(b) for b in args.x], dtype=np.uint8)
        r = oracle.check_loptUB(_parse_floats(args.f), bits)
        print(f"lhs={r.lhs} rhs={r.rhs} holds={r.holds}")
    elif args.op == "binom-tail":
        r = oracle.check_binomial_tail_bound(args.n, args.p, args.k)
        print(f"lhs={r.lhs} rhs={r.rhs} holds={r.holds}")
    elif args.op == "droste":
        rep = oracle.estimate_droste_constant([1, 4, 16, 64], args.n or 256,
                                              seed=args.seed or 0)
        for row in rep.rows:
            print(f"D={row.D} threshold={row.threshold:.4f} family={row.family_prob:.5f} "
                  f"min_random={row.min_random_prob:.5f}")
        print(f"constant floor estimate: {rep.constant_estimate:.5f}")
    elif args.op == "gap-claim":
        print(json.dumps(oracle.prior_gap_claim_report(args.n, args.k, args.p)))
    else:
        raise ConfigError(f"unknown oracle op {args.op!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config mirroring the experiment spec")
    common.add_argument("--seed", type=int, default=None, help="master seed override")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads (speed only; outputs are identical)")
    common.add_argument("--quick", action="store_true", help="reduced grids")

    parser = argparse.ArgumentParser(prog="cga-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="one traced cGA run")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", type=int, required=True)
    p.add_argument("--fitness", default="jump", choices=["onemax", "jump", "plateau"])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--target-d", type=float, default=None)
    p.add_argument("--potential-c", type=float, default=None)
    p.add_argument("--trace", default=None, help="JSONL trace output path")
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="scaling sweeps")
    p.add_argument("--kind", required=True, choices=["upper", "lower", "nlogn"])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="exact inequality suite")
    p.add_argument("--cases", type=int, default=None,
                   help="cases per randomized sweep (default: full grids)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("parallel", parents=[common], help="parallel-run scheduler")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--fitness", default="onemax", choices=["onemax", "jump", "plateau"])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--cap", type=int, default=1 << 20,
                   help="per-process cumulative budget cap")
    p.set_defaults(func=cmd_parallel)

    p = sub.add_parser("demo", parents=[common], help="counterexample demos")
    p.add_argument("--kind", default="domination", choices=["domination", "potential"])
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("oracle", parents=[common], help="ad-hoc exact queries")
    p.add_argument("--op", required=True,
                   choices=["pmf", "point", "distinct", "gap", "loptub",
                            "binom-tail", "droste", "gap-claim"])
    p.add_argument("--f", default="", help="comma-separated frequencies")
    p.add_argument("--x", default="", help="bit string, e.g. 1011")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p", type=float, default=0.5)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
