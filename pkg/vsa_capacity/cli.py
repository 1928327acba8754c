"""Command line front end.

Usage::

    vsa-capacity theory --snr 0 1 2 --tokens 27
    vsa-capacity simulate --config configs/hdc.json --trials 2000 --out results
    vsa-capacity sweep --config configs/fig2a.json --threads 4
    vsa-capacity compare --config configs/fig2a.json --tolerance-sigmas 3
    vsa-capacity optimize --config configs/capacity.json
    vsa-capacity figure 2A --trials 200
"""

from __future__ import annotations

import argparse
import itertools
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .config import (
    ExperimentSpec,
    OptimizeRequest,
    SweepConfig,
    TheoryRequest,
    parse_config,
    read_raw_config,
)
from .exceptions import VSAError
from .figures import FIGURES, FigureContext, out_of_scope_notice, run_figure
from .harness import SweepResult, Table, compare, run_dsr_trials, run_sweep, run_trials
from .theory import (
    BitFlip,
    DecayFilled,
    DecayFinite,
    LinearExact,
    LinearLargeM,
    PerStepNoise,
    ReadoutNoise,
    accuracy_numeric,
    capacity_search,
    item_info,
    snr,
)
from .utils import logger

EXIT_OK = 0
EXIT_COMPARE_FAILED = 1
EXIT_ERROR = 2


# -- theory ----------------------------------------------------------------


def _scenarios(request: TheoryRequest):
    """Yield (row fields, scenario) for every combination the variant uses."""
    n, m, lam, k, level = (
        request.n_dim,
        request.length,
        request.contraction,
        request.lookback,
        request.noise_level,
    )
    variant = request.variant
    if variant == "LinearLargeM":
        for a, b in itertools.product(n, m):
            yield {"N": a, "M": b}, LinearLargeM(a, b)
    elif variant == "LinearExact":
        for a, b in itertools.product(n, m):
            yield {"N": a, "M": b}, LinearExact(a, b, request.variance_ratio)
    elif variant == "DecayFinite":
        for a, b, c, d in itertools.product(n, m, lam, k):
            yield {"N": a, "M": b, "lambda": c, "K": d}, DecayFinite(a, b, c, d)
    elif variant == "DecayFilled":
        for a, c, d in itertools.product(n, lam, k):
            yield {"N": a, "M": "filled", "lambda": c, "K": d}, DecayFilled(a, c, d)
    else:
        cls = {"ReadoutNoise": ReadoutNoise, "PerStepNoise": PerStepNoise, "BitFlip": BitFlip}[variant]
        for a, b, e in itertools.product(n, m, level):
            yield {"N": a, "M": b, "noise_level": e}, cls(a, b, e)


def theory_table(request: TheoryRequest) -> Table:
    def accuracy(s: float, d: int) -> float:
        return float(
            accuracy_numeric(
                s,
                d,
                request.threshold,
                resolution=request.resolution,
                window=request.window,
                settings=request.settings,
            )
        )

    rows: list[dict[str, Any]] = []
    if request.variant == "snr":
        for d in request.n_tokens:
            for s in request.snr:
                p = accuracy(s, d)
                rows.append({"D": d, "s": s, "p_corr": p, "I_item": float(item_info(p, d))})
        fieldnames = ["D", "s", "p_corr", "I_item"]
    else:
        for params, scenario in _scenarios(request):
            s = snr(scenario)
            for d in request.n_tokens:
                p = accuracy(s, d)
                rows.append({**params, "D": d, "s": s, "p_corr": p, "I_item": float(item_info(p, d))})
        fieldnames = ["N", "M", "lambda", "K", "noise_level", "D", "s", "p_corr", "I_item"]
        fieldnames = [f for f in fieldnames if any(f in row for row in rows)]
    return Table(fieldnames, rows, {"theory": request.model_dump(mode="json")})


# -- optimize --------------------------------------------------------------


def default_grid(objective: str, n_dim: int) -> list[float]:
    if objective == "M":
        return sorted({float(int(m)) for m in np.geomspace(1, 10 * n_dim, 200)})
    if objective == "lambda":
        return [float(1 - x) for x in np.geomspace(1e-4, 0.5, 60)]
    if objective == "kappa":
        return [float(k) for k in range(1, 61)]
    return [float(g) for g in np.geomspace(0.5, 200, 40)]


def optimize_table(request: OptimizeRequest) -> Table:
    grid = request.grid or default_grid(request.objective, request.n_dim)
    n_bins = request.squash_bins if request.objective == "gamma" else None
    result = capacity_search(
        request.objective,
        request.n_dim,
        request.n_tokens,
        grid,
        request.length,
        n_bins,
        settings=request.settings,
    )
    logger.info(f"{request.objective}={result.argmax}: {max(result.values):.4f} bits/neuron")
    config = {"optimize": request.model_dump(mode="json"), "argmax": result.argmax}
    return Table(["objective", "N", "D", "value", "I_per_neuron", "argmax"], result.rows(), config)


# -- config loading --------------------------------------------------------


def _spec_overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in (("seed", args.seed), ("trials", args.trials)) if v is not None}


def _load_spec(args: argparse.Namespace) -> ExperimentSpec:
    data = read_raw_config(args.config) if args.config else {}
    data.update(_spec_overrides(args))
    return parse_config(data, ExperimentSpec)


def _load_sweep(args: argparse.Namespace) -> SweepConfig:
    data = read_raw_config(args.config) if args.config else {}
    if "base" not in data and "grid" not in data:
        # a plain spec is a singleton sweep
        data = {"base": data}
    data["base"] = {**data.get("base", {}), **_spec_overrides(args)}
    return parse_config(data, SweepConfig)


def _load_model(args: argparse.Namespace, model):
    data = read_raw_config(args.config) if args.config else {}
    return parse_config(data, model)


# -- commands --------------------------------------------------------------


def _write(args: argparse.Namespace, table: Table, stem: str, **meta: Any) -> None:
    paths = table.write(args.out, stem, args.format, {"version": __version__, **meta})
    for path in paths:
        print(path)


def cmd_theory(args: argparse.Namespace) -> int:
    data = read_raw_config(args.config) if args.config else {}
    if args.snr is not None:
        data.update(variant="snr", snr=args.snr)
    if args.tokens is not None:
        data["n_tokens"] = args.tokens
    request = parse_config(data, TheoryRequest)
    _write(args, theory_table(request), "theory")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = _load_spec(args)
    result = run_dsr_trials(spec) if args.dsr else run_trials(spec, args.threads)
    _write(args, result.table(), "simulate")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    result = run_sweep(_load_sweep(args), args.threads)
    _write(args, result.table(), "sweep")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    result: SweepResult = run_sweep(_load_sweep(args), args.threads)
    report = compare(result, args.tolerance_sigmas, args.min_pass_rate)
    table = result.table()
    z_by_row = {check.index: check for check in report.checks}
    for index, row in enumerate(table.rows):
        check = z_by_row.get(index)
        row["z"] = check.z if check else None
        row["within_tolerance"] = check.passed if check else None
    table.fieldnames += ["z", "within_tolerance"]
    summary = report.summary()
    _write(args, table, "compare", summary=summary)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status}: {summary['rows'] - summary['failed']}/{summary['rows']} rows within "
          f"{report.tolerance_sigmas} sigma ({summary['skipped']} skipped)")
    return EXIT_OK if report.passed else EXIT_COMPARE_FAILED


def cmd_optimize(args: argparse.Namespace) -> int:
    _write(args, optimize_table(_load_model(args, OptimizeRequest)), "optimize")
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    if args.list or not args.figure_id:
        for fig in FIGURES.values():
            print(f"{fig.figure_id:>6}  {fig.description}")
        return EXIT_OK
    if notice := out_of_scope_notice(args.figure_id):
        print(f"figure {args.figure_id}: out of scope, {notice}")
        return EXIT_OK
    ctx = FigureContext(
        trials=args.trials or FigureContext.trials,
        seed=FigureContext.seed if args.seed is None else args.seed,
        threads=args.threads,
    )
    table = run_figure(args.figure_id, ctx)
    stem = "figure_" + args.figure_id.strip().upper().replace("-", "_")
    _write(args, table, stem)
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def _positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("must be an integer") from None
    if number < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return number


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON or sectionless .conf file")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, help="master seed override")
    common.add_argument("--trials", type=_positive_int, help="trial count override")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    parser = argparse.ArgumentParser(
        prog="vsa-capacity",
        description="Capacity theory and simulation of randomized superposition memories.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    theory = sub.add_parser("theory", parents=[common], help="evaluate analytic accuracy curves")
    theory.add_argument("--snr", type=float, nargs="+", help="SNR values (variant 'snr')")
    theory.add_argument("--tokens", type=int, nargs="+", help="alphabet sizes D")
    theory.set_defaults(func=cmd_theory)

    simulate = sub.add_parser("simulate", parents=[common], help="run one experiment")
    simulate.add_argument("--dsr", action="store_true", help="use the shift register baseline")
    simulate.set_defaults(func=cmd_simulate)

    sub.add_parser("sweep", parents=[common], help="run an experiment grid").set_defaults(
        func=cmd_sweep
    )

    check = sub.add_parser("compare", parents=[common], help="simulation against theory")
    check.add_argument("--tolerance-sigmas", type=float, default=3.0)
    check.add_argument("--min-pass-rate", type=float, default=1.0)
    check.set_defaults(func=cmd_compare)

    sub.add_parser("optimize", parents=[common], help="capacity grid search").set_defaults(
        func=cmd_optimize
    )

    fig = sub.add_parser("figure", parents=[common], help="regenerate one figure's data")
    fig.add_argument("figure_id", nargs="?", help="e.g. 2A, 4C2, 9, plate")
    fig.add_argument("--list", action="store_true", help="list the figure ids")
    fig.set_defaults(func=cmd_figure)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except VSAError as e:
        print(e, file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        logger.exception(e)
        print(f"[-] Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
