"""Command-line entry point for the benchmark harness.

Subcommands:
  cs-run  --config FILE   sparse-recovery sweep, results CSV
  opf-run --config FILE   multi-start placement run, plan JSON + table
  check                   cross-module invariant suite (exit 1 on failure)
  gen --case N --seed S --out DIR   write one instance CSV bundle

Config files are flat `key = value` lines (# comments allowed); see
config_from_dict for the recognized keys.
"""

import argparse
import sys

from . import bench, cs

_LIST_KEYS = {"cases", "solvers"}
_INT_KEYS = {"n_seeds", "base_seed", "max_iter", "restart_period", "workers",
             "opf_starts", "opf_max_iter"}
_FLOAT_KEYS = {"gamma", "stop_rel_tol", "lambda_bar", "mu_bar", "delta",
               "baseline_cost", "round_tol"}
_STR_KEYS = {"loss_kind", "out_csv", "out_json"}


def parse_config(path):
    """Flat key = value file to a string dict."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected key = value" % (path, lineno))
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


def config_from_dict(raw):
    """ExperimentConfig from string key/values, with type coercion."""
    kwargs = {}
    for key, value in raw.items():
        if key in _LIST_KEYS:
            items = [v.strip() for v in value.split(",") if v.strip()]
            if key == "cases":
                kwargs[key] = tuple(int(v) for v in items)
            else:
                kwargs[key] = tuple(items)
        elif key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(value)
        elif key in _STR_KEYS:
            kwargs[key] = value
        else:
            raise ValueError("unknown config key %r" % key)
    return bench.ExperimentConfig(**kwargs)


def load_config(path):
    return config_from_dict(parse_config(path)) if path else bench.ExperimentConfig()


def cmd_cs_run(args):
    cfg = load_config(args.config)
    result = bench.run_cs_sweep(cfg)
    print(bench.results_csv_text(result.rows), end="")
    n_errors = sum(row["n_errors"] for row in result.rows)
    if n_errors:
        print("%d cell(s) failed" % n_errors, file=sys.stderr)
    return 1 if n_errors else 0


def cmd_opf_run(args):
    cfg = load_config(args.config)
    result = bench.run_opf(cfg)
    for solver, stat in result.stats.items():
        print("%-10s mean obj %.6f  best obj %.6f  mean iters %.1f"
              % (solver, stat["mean_objective"], stat["best_objective"],
                 stat["mean_iterations"]))
    print("step-norm tail fit R^2: %.4f (diagnostic only)" % result.rate_r2)
    if result.best_report is not None:
        print(result.best_report.table())
    return 0


def cmd_check(args):
    return 1 if bench.run_checks() else 0


def cmd_gen(args):
    cfg = bench.ExperimentConfig(loss_kind=args.loss).resolved()
    inst = cs.make_instance(args.case, args.seed, cfg.gamma, cfg.loss_kind)
    cs.save_instance(inst, args.out)
    print("wrote case %d seed %d (%d x %d) to %s"
          % (args.case, args.seed, inst.m, inst.d, args.out))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dcprox", description="Difference-of-convex proximal benchmarks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cs-run", help="sparse-recovery sweep")
    p.add_argument("--config", help="flat key=value config file")
    p.set_defaults(func=cmd_cs_run)

    p = sub.add_parser("opf-run", help="multi-start placement benchmark")
    p.add_argument("--config", help="flat key=value config file")
    p.set_defaults(func=cmd_opf_run)

    p = sub.add_parser("check", help="run the invariant suite")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write one instance bundle")
    p.add_argument("--case", type=int, required=True, choices=sorted(cs.CASES))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--loss", default="least-squares",
                   choices=("least-squares", "lorentzian"))
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
