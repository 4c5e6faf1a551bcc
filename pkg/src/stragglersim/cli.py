"""Command-line front end.

Subcommands: schedule, simulate, compare, analyze, lower-bound, coded-demo,
dgd, figure3 (plus a hidden oracle debugging command). Exit codes: 0 on
success, 1 on runtime failure, 2 on invalid configuration, 3 on an
infeasible scheme/config combination.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import analytic, coded, completion, dgd
from .completion import InfeasibleTargetError
from .config import ConfigError, ExperimentConfig, build_delay_model, load_config_file
from .delays import DelayModel
from .schedules import (
    CompletionConfig,
    TaskOrderMatrix,
    cyclic_schedule,
    random_assignment_schedule,
    staircase_schedule,
    validate,
)

__all__ = ["main"]


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="TOML or JSON experiment config file")
    sub.add_argument("--seed", type=int, help="base seed (overrides config)")
    sub.add_argument("--reps", type=int, help="Monte Carlo replications (overrides config)")
    sub.add_argument("--out", help="output file path")
    sub.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")


def _size_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, help="worker count")
    sub.add_argument("--r", type=int, help="computation load")
    sub.add_argument("--k", type=int, help="computation target")
    sub.add_argument("--scenario", choices=("1", "2"), help="built-in delay preset")


def _load_experiment(args) -> ExperimentConfig:
    cfg = load_config_file(args.config) if args.config else ExperimentConfig()
    if getattr(args, "n", None) is not None:
        cfg.n = args.n
    if getattr(args, "r", None) is not None:
        cfg.r_list = [args.r]
    if getattr(args, "k", None) is not None:
        cfg.k_list = [args.k]
    if getattr(args, "scenario", None):
        cfg.delay = {"preset": f"scenario{args.scenario}"}
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "reps", None) is not None:
        cfg.reps = args.reps
    if getattr(args, "schemes", None):
        cfg.schemes = [s.strip().lower() for s in args.schemes.split(",") if s.strip()]
    if getattr(args, "scheme", None):
        cfg.schemes = [args.scheme.lower()]
    return cfg


def _require(cfg: ExperimentConfig, *names) -> None:
    missing = []
    for name in names:
        value = getattr(cfg, name)
        if value is None or value == []:
            missing.append(name.replace("_list", ""))
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(missing)}")


def _single_setup(cfg: ExperimentConfig) -> tuple[CompletionConfig, DelayModel]:
    _require(cfg, "n", "r_list", "k_list", "seed")
    if len(cfg.r_list) != 1 or len(cfg.k_list) != 1:
        raise ConfigError("this command takes a single r and a single k")
    config = CompletionConfig(n=cfg.n, r=cfg.r_list[0], k=cfg.k_list[0])
    model = build_delay_model(cfg.delay, n=config.n, r=config.r, seed=cfg.seed)
    return config, model


def _emit_reports(reports, args) -> None:
    for rep in reports:
        print(
            f"{rep.scheme}: mean {rep.mean_ms:.3g} ms, stderr {rep.stderr_ms:.3g} ms "
            f"({rep.reps} reps, seed {rep.seed})"
        )
    if args.out:
        if args.format == "json":
            with open(args.out, "w") as fh:
                fh.write(completion.reports_to_json(reports))
        else:
            completion.write_summary_csv(reports, args.out)
        print(f"wrote {args.out}")


def _cmd_schedule(args) -> int:
    n, r = args.n, args.r
    if n is None:
        raise ConfigError("--n is required")
    scheme = args.scheme.lower()
    if scheme == "cs":
        matrix = cyclic_schedule(n, r if r is not None else n)
    elif scheme == "ss":
        matrix = staircase_schedule(n, r if r is not None else n)
    elif scheme == "ra":
        rng = np.random.default_rng(args.seed if args.seed is not None else 0)
        matrix = random_assignment_schedule(n, rng)
    else:
        raise ConfigError(f"unknown scheme {scheme!r}")
    text = matrix.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_simulate(args) -> int:
    cfg = _load_experiment(args)
    _require(cfg, "schemes", "reps")
    config, model = _single_setup(cfg)
    report = completion.monte_carlo(cfg.schemes[0], model, config, cfg.reps, cfg.seed)
    _emit_reports([report], args)
    return 0


def _cmd_compare(args) -> int:
    cfg = _load_experiment(args)
    _require(cfg, "schemes", "reps", "n", "r_list", "k_list", "seed")
    reports = []
    for r in cfg.r_list:
        for k in cfg.k_list:
            config = CompletionConfig(n=cfg.n, r=r, k=k)
            model = build_delay_model(cfg.delay, n=cfg.n, r=r, seed=cfg.seed)
            reports.extend(completion.compare(cfg.schemes, model, config, cfg.reps, cfg.seed))
    _emit_reports(reports, args)
    return 0


def _cmd_lower_bound(args) -> int:
    cfg = _load_experiment(args)
    _require(cfg, "reps")
    config, model = _single_setup(cfg)
    report = completion.monte_carlo("lb", model, config, cfg.reps, cfg.seed)
    _emit_reports([report], args)
    return 0


def _load_schedule_arg(args, config: CompletionConfig) -> TaskOrderMatrix:
    if getattr(args, "schedule_file", None):
        with open(args.schedule_file) as fh:
            matrix = TaskOrderMatrix.from_text(fh.read())
        report = validate(matrix, config)
        if not report.ok:
            raise InfeasibleTargetError("; ".join(report.errors))
        return matrix
    scheme = (args.scheme or "cs").lower()
    if scheme == "cs":
        return cyclic_schedule(config.n, config.r)
    if scheme == "ss":
        return staircase_schedule(config.n, config.r)
    raise ConfigError("analyze needs --scheme cs|ss or --schedule-file")


def _cmd_analyze(args) -> int:
    cfg = _load_experiment(args)
    if cfg.seed is None:
        cfg.seed = 0
    config, model = _single_setup(cfg)
    schedule = _load_schedule_arg(args, config)
    curve = analytic.survival_curve(
        schedule, model, config, points=args.points, qmc_samples=args.qmc_samples
    )
    mean = analytic.average_completion(
        schedule, model, config, tol=args.quad_tol, qmc_samples=args.qmc_samples
    )
    print(f"mean completion: {mean * 1e3:.6g} ms")
    if args.out:
        if args.format == "json":
            payload = {
                "mean_seconds": mean,
                "curve": [
                    {"t_seconds": float(t), "survival": float(v)}
                    for t, v in zip(curve.grid, curve.values)
                ],
            }
            with open(args.out, "w") as fh:
                json.dump(payload, fh, indent=2)
        else:
            with open(args.out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t_seconds", "survival"])
                for t, v in zip(curve.grid, curve.values):
                    writer.writerow([repr(float(t)), repr(float(v))])
        print(f"wrote {args.out}")
    return 0


def _cmd_coded_demo(args) -> int:
    report = coded.coded_demo_report(d=args.d, big_n=args.rows, seed=args.seed or 0)
    print(f"one-shot code max relative error:      {report['pc_max_rel_error']:.3e}")
    print(f"multi-message code max relative error: {report['pcmm_max_rel_error']:.3e}")
    return 0


def _cmd_dgd(args) -> int:
    cfg = _load_experiment(args)
    _require(cfg, "schemes")
    if cfg.seed is None:
        cfg.seed = 0
    config, model = _single_setup(cfg)
    dataset = dgd.generate_dataset(args.rows, args.d, config.n, args.data_seed)
    result = dgd.run_dgd(
        cfg.schemes[0],
        model,
        config,
        dataset,
        iterations=args.iters,
        eta=args.eta,
        seed=cfg.seed,
        reshuffle_every=args.reshuffle_every,
    )
    total_ms = float(result.cumulative_seconds[-1]) * 1e3
    print(
        f"{result.scheme}: final loss {result.losses[-1]:.6g} after {args.iters} "
        f"iterations, simulated wall clock {total_ms:.3g} ms"
    )
    if args.out:
        cumulative = result.cumulative_seconds
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "loss", "iteration_completion_ms", "cumulative_ms", "scheme"])
            for it in range(args.iters):
                writer.writerow(
                    [
                        it + 1,
                        repr(float(result.losses[it + 1])),
                        repr(float(result.iteration_seconds[it] * 1e3)),
                        repr(float(cumulative[it] * 1e3)),
                        result.scheme,
                    ]
                )
        print(f"wrote {args.out}")
    return 0


def _cmd_figure3(args) -> int:
    n = args.n
    reps = args.reps if args.reps is not None else 100_000
    seed = args.seed if args.seed is not None else 0
    scenario = f"scenario{args.scenario}"
    rows = []
    for r in range(2, n + 1):
        config = CompletionConfig(n=n, r=r, k=n)
        model = build_delay_model({"preset": scenario}, n=n, r=r, seed=seed)
        schemes = ["cs", "ss", "pc", "pcmm"]
        if r == n:
            schemes.append("ra")
        reports = completion.compare(schemes, model, config, reps, seed)
        by_scheme = {rep.scheme: rep.mean_ms for rep in reports}
        rows.append(
            {
                "r": r,
                "cs_ms": by_scheme["cs"],
                "ss_ms": by_scheme["ss"],
                "pc_ms": by_scheme["pc"],
                "pcmm_ms": by_scheme["pcmm"],
                "ra_ms": by_scheme.get("ra"),
            }
        )
        print(
            f"r={r}: cs {by_scheme['cs']:.3g} ss {by_scheme['ss']:.3g} "
            f"pc {by_scheme['pc']:.3g} pcmm {by_scheme['pcmm']:.3g}"
            + (f" ra {by_scheme['ra']:.3g}" if "ra" in by_scheme else "")
            + " (ms)"
        )
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "cs_ms", "ss_ms", "pc_ms", "pcmm_ms", "ra_ms"])
            for row in rows:
                writer.writerow(
                    [
                        row["r"],
                        repr(row["cs_ms"]),
                        repr(row["ss_ms"]),
                        repr(row["pc_ms"]),
                        repr(row["pcmm_ms"]),
                        "" if row["ra_ms"] is None else repr(row["ra_ms"]),
                    ]
                )
        print(f"wrote {args.out}")
    if args.svg:
        _write_svg(rows, args.svg)
        print(f"wrote {args.svg}")
    return 0


def _write_svg(rows, path) -> None:
    """Minimal static line chart: mean completion (ms) versus load."""
    series = [("cs_ms", "#1f77b4"), ("ss_ms", "#2ca02c"), ("pc_ms", "#d62728"), ("pcmm_ms", "#ff7f0e")]
    width, height, margin = 640, 420, 56
    xs = [row["r"] for row in rows]
    ys = [row[key] for key, _ in series for row in rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = 0.0, max(ys) * 1.05
    def px(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)
    def py(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" font-size="13">computation load r</text>',
        f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-size="13" transform="rotate(-90 14 {height / 2:.0f})">mean completion (ms)</text>',
    ]
    for key, color in series:
        points = " ".join(f"{px(row['r']):.1f},{py(row[key]):.1f}" for row in rows)
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        label = key.removesuffix("_ms")
        parts.append(
            f'<text x="{px(rows[-1]["r"]) + 4:.1f}" y="{py(rows[-1][key]):.1f}" font-size="12" fill="{color}">{label}</text>'
        )
    ra_rows = [row for row in rows if row["ra_ms"] is not None]
    for row in ra_rows:
        parts.append(
            f'<circle cx="{px(row["r"]):.1f}" cy="{py(row["ra_ms"]):.1f}" r="3.5" fill="#9467bd"/>'
        )
        parts.append(
            f'<text x="{px(row["r"]) - 8:.1f}" y="{py(row["ra_ms"]) - 8:.1f}" font-size="12" fill="#9467bd">ra</text>'
        )
    for x in xs:
        parts.append(
            f'<text x="{px(x):.1f}" y="{height - margin + 16}" text-anchor="middle" font-size="11">{x}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _cmd_oracle(args) -> int:
    from . import oracle

    cfg = _load_experiment(args)
    if cfg.seed is None:
        cfg.seed = 0
    config, model = _single_setup(cfg)
    schedule = _load_schedule_arg(args, config)
    mean = oracle.exact_mean(schedule, model, config.k)
    print(f"exact mean completion: {mean * 1e3:.9g} ms")
    if args.t is not None:
        print(f"exact survival at t={args.t}: {oracle.exact_survival(schedule, model, config.k, args.t)!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stragglersim",
        description="Schedule construction, completion-time analysis, and "
        "gradient-descent replay for master-worker computing with stragglers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="print or save a task-ordering matrix")
    p.add_argument("--scheme", required=True, help="cs, ss, or ra")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("simulate", help="Monte Carlo mean completion for one scheme")
    p.add_argument("--scheme", help="cs, ss, ra, pc, pcmm, or lb")
    _size_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="compare schemes on common random traces")
    p.add_argument("--schemes", help="comma-separated scheme list")
    _size_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("analyze", help="closed-form survival curve and mean")
    p.add_argument("--scheme", help="cs or ss")
    p.add_argument("--schedule-file", help="custom schedule in text format")
    p.add_argument("--points", type=int, default=201, help="curve grid size")
    p.add_argument("--quad-tol", type=float, default=1e-7)
    p.add_argument("--qmc-samples", type=int, default=analytic.DEFAULT_QMC_SAMPLES)
    _size_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("lower-bound", help="genie lower bound via Monte Carlo")
    _size_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_lower_bound)

    p = sub.add_parser("coded-demo", help="verify the n=4, r=2 coded baselines")
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--rows", type=int, default=32, help="dataset rows N")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_coded_demo)

    p = sub.add_parser("dgd", help="scheme-driven distributed gradient descent")
    p.add_argument("--scheme", help="cs, ss, ra, pc, or pcmm")
    p.add_argument("--rows", type=int, default=100, help="dataset rows N")
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--reshuffle-every", type=int)
    _size_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_dgd)

    p = sub.add_parser("figure3", help="mean completion versus load sweep")
    p.add_argument("--scenario", choices=("1", "2"), required=True)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--svg", help="also draw a minimal SVG chart")
    _common_flags(p)
    p.set_defaults(func=_cmd_figure3)

    p = sub.add_parser("oracle", help=argparse.SUPPRESS)  # exact enumeration debugging
    p.add_argument("--scheme")
    p.add_argument("--schedule-file")
    p.add_argument("--t", type=float)
    _size_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleTargetError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # runtime failure contract: exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
