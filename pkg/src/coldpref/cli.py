"""Command-line front end.

Subcommands: prep, synth, run, bench-limit, plot. Exit codes: 0 success,
1 runtime failure, 2 usage or validation error. Every command is
deterministic given identical inputs and seeds.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as config_mod
from . import experiment, prep
from .experiment import COLDSTART_PRETRAINED

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldpref",
        description=(
            "Cold-start active preference learning: dataset preparation, "
            "policy benchmarking against a simulated noisy oracle, and "
            "learning-curve reporting."
        ),
    )
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel runs for `run`")
    parser.add_argument("--verbose", action="store_true", help="chatty progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_prep = sub.add_parser("prep", help="clean and standardize a raw CSV")
    p_prep.add_argument("input_csv")
    p_prep.add_argument("--target", required=True, help="name of the target column")
    p_prep.add_argument("--out", required=True, help="prepared CSV output path")
    p_prep.add_argument("--report", help="optional text report path")
    p_prep.add_argument(
        "--drop", action="append", default=[], metavar="COLUMN",
        help="drop this column before cleaning (repeatable)",
    )
    p_prep.add_argument("--onehot-max-cardinality", type=int, default=10)
    p_prep.add_argument("--drop-threshold", type=float, default=0.5)

    p_synth = sub.add_parser("synth", help="generate a synthetic prepared dataset")
    p_synth.add_argument("--n", type=int, default=2000)
    p_synth.add_argument("--p", type=int, default=10)
    p_synth.add_argument("--noise-std", type=float, default=0.1)
    p_synth.add_argument("--out", required=True, help="prepared CSV output path")
    p_synth.add_argument("--report", help="optional text report path")

    p_run = sub.add_parser("run", help="execute the configured learning policies")
    p_run.add_argument("config_file")
    p_run.add_argument("--out", help="results CSV path (overrides results_csv)")

    p_limit = sub.add_parser(
        "bench-limit", help="compute the practical performance limit"
    )
    p_limit.add_argument("config_file")
    p_limit.add_argument("--out", help="limit CSV path (overrides limit_csv)")

    p_plot = sub.add_parser("plot", help="render learning curves from a results CSV")
    p_plot.add_argument("results_csv")
    p_plot.add_argument("--out", required=True, help="output figure path (SVG)")
    p_plot.add_argument("--limit", help="optional limit CSV to draw as a line")
    return parser


def cmd_prep(args: argparse.Namespace) -> int:
    try:
        table = prep.read_csv(args.input_csv, args.target, tuple(args.drop))
        dataset = prep.prepare_table(
            table,
            onehot_max_cardinality=args.onehot_max_cardinality,
            drop_threshold=args.drop_threshold,
        )
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dataset.validate()
    prep.write_prepared_csv(dataset, args.out)
    report_text = dataset.prep_report.to_text() + prep.target_summary(dataset.y) + "\n"
    if args.report:
        Path(args.report).write_text(report_text, encoding="utf-8")
    print(f"prepared {dataset.n} rows x {dataset.p} features -> {args.out}")
    if args.verbose:
        print(report_text, end="")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    seed = 0 if args.seed is None else args.seed
    try:
        dataset = prep.generate_synthetic(args.n, args.p, args.noise_std, seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    prep.write_prepared_csv(dataset, args.out)
    if args.report:
        Path(args.report).write_text(
            dataset.prep_report.to_text() + prep.target_summary(dataset.y) + "\n",
            encoding="utf-8",
        )
    print(f"synthetic dataset {dataset.n} rows x {dataset.p} features -> {args.out}")
    return EXIT_OK


def _load_config(args: argparse.Namespace) -> config_mod.RunConfig:
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = str(args.seed)
    return config_mod.load_run_config(args.config_file, overrides=overrides)


def _load_dataset(cfg: config_mod.RunConfig) -> prep.PreparedDataset:
    if cfg.data_csv is not None:
        dataset = prep.read_prepared_csv(cfg.data_csv)
        return prep.ensure_standardized(dataset)
    seed = experiment.child_seed(cfg.scenario.master_seed, "synthetic-data")
    return prep.generate_synthetic(
        cfg.synthetic_n, cfg.synthetic_p, cfg.synthetic_noise_std, seed
    )


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = _load_config(args)
    except config_mod.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    results_path = args.out or cfg.results_csv
    if results_path is None:
        print("error: results_csv not set (config key or --out)", file=sys.stderr)
        return EXIT_USAGE
    try:
        dataset = _load_dataset(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        rows = experiment.run_scenario(
            dataset, cfg.dataset_id, cfg.scenario, jobs=max(1, args.jobs)
        )
        experiment.write_results_csv(rows, results_path)
        aggregates = experiment.aggregate_runs(rows)
        stem = Path(results_path)
        agg_path = stem.with_name(stem.stem + "_agg.csv")
        experiment.write_aggregate_csv(aggregates, str(agg_path))
        figure_path = stem.with_suffix(".svg")
        from .plotting import render_learning_curves

        render_learning_curves(
            aggregates, str(figure_path), title=cfg.dataset_id
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    print(f"wrote {len(rows)} result rows -> {results_path}")
    print(f"wrote aggregate curves -> {agg_path}")
    print(f"wrote figure -> {figure_path}")
    final_q = cfg.scenario.query_grid()[-1]
    for policy in cfg.scenario.policies:
        finals = [a for a in aggregates if a.policy == policy and a.queries == final_q]
        if finals:
            a = finals[0]
            print(
                f"{policy}: final mean F1 = {a.f1_mean:.4f} "
                f"(queries={a.queries}, runs={a.n_runs})"
            )
    if COLDSTART_PRETRAINED in cfg.scenario.policies:
        as_is, reversed_f1 = experiment.warmup_orientation_f1(dataset, cfg.scenario)
        print(
            f"warm-up orientation check: F1(scores)={as_is:.4f} "
            f"F1(reversed)={reversed_f1:.4f}"
        )
        if args.verbose:
            from .pca import fit_first_component, plan_warmup, warmup_report

            pca_model = fit_first_component(dataset.X)
            plan = plan_warmup(
                pca_model,
                dataset.n,
                cfg.scenario.warmup_scale,
                cfg.scenario.warmup_residual_penalty,
                cfg.scenario.warmup_epsilon,
            )
            print(warmup_report(pca_model, plan, dataset.feature_names), end="")
    return EXIT_OK


def cmd_bench_limit(args: argparse.Namespace) -> int:
    try:
        cfg = _load_config(args)
    except config_mod.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_path = args.out or cfg.limit_csv
    if out_path is None:
        print("error: limit_csv not set (config key or --out)", file=sys.stderr)
        return EXIT_USAGE
    try:
        dataset = _load_dataset(cfg)
        f1_limit = experiment.practical_limit(dataset, cfg.scenario)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    experiment.write_limit_csv(cfg.dataset_id, f1_limit, out_path)
    print(f"practical performance limit F1 = {f1_limit:.4f} -> {out_path}")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    from .plotting import render_learning_curves

    try:
        rows = experiment.read_results_csv(args.results_csv)
        aggregates = experiment.aggregate_runs(rows)
        limit = None
        if args.limit:
            limits = experiment.read_limit_csv(args.limit)
            dataset_id = aggregates[0].dataset
            limit = limits.get(dataset_id)
            if limit is None:
                raise ValueError(
                    f"limit CSV has no row for dataset {dataset_id!r}"
                )
        render_learning_curves(aggregates, args.out, limit=limit)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"wrote figure -> {args.out}")
    return EXIT_OK


_COMMANDS = {
    "prep": cmd_prep,
    "synth": cmd_synth,
    "run": cmd_run,
    "bench-limit": cmd_bench_limit,
    "plot": cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    return _COMMANDS[args.command](args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
