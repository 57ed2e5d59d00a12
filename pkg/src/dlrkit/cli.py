"""Command line interface: gen, rate, train, eval, forecast, plot.

Every subcommand prints its fully resolved configuration (defaults
included) to standard error before doing any work, and all outputs are
deterministic functions of the flags. Exit codes: 0 success, 1 usage
error, 2 data/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import dataset, metrics, svgplot, synth, thermal
from . import model as model_mod
from .errors import DataError, NumericalError, UsageError


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so errors map to exit 1."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dlrkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("gen", parents=[], help="generate a synthetic sensor CSV")
    p.add_argument("--days", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--spec", default=None, help="conductor spec key=value file")
    p.add_argument("--step-min", type=int, default=15, dest="step_min")

    p = sub.add_parser("rate", help="fill the dlr_a column from the weather columns")
    p.add_argument("--in", required=True, dest="in_path")
    p.add_argument("--out", required=True)
    p.add_argument("--spec", default=None)

    p = sub.add_parser("train", help="train a forecaster on a sensor CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--case", type=int, required=True, choices=(1, 2))
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=16)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--train-frac", type=float, default=0.8, dest="train_frac")

    p = sub.add_parser("eval", help="score a model on the chronological test tail")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--compare", default=None,
                   help="previously written report to pair with this one")
    p.add_argument("--compare-out", default=None, dest="compare_out",
                   help="where to write the two-model comparison document")

    p = sub.add_parser("forecast", help="one step-ahead prediction per window")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot", help="render actual vs predicted series to SVG")
    p.add_argument("--actual", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--pred2", default=None)
    p.add_argument("--out", required=True)

    return parser


def _announce(args: argparse.Namespace) -> None:
    shown = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    rendered = " ".join(f"{k}={v}" for k, v in shown.items())
    print(f"[dlrkit] {args.command} config: {rendered}", file=sys.stderr)


def _load_spec(path: str | None) -> thermal.ConductorSpec:
    return thermal.DEFAULT_SPEC if path is None else thermal.read_spec_file(path)


def _cmd_gen(args) -> None:
    try:
        cfg = synth.GenConfig(days=args.days, seed=args.seed,
                              step_minutes=args.step_min)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    series = synth.generate(cfg, _load_spec(args.spec))
    dataset.write_csv(series, args.out)
    print(f"[dlrkit] wrote {len(series)} records to {args.out}", file=sys.stderr)


def _cmd_rate(args) -> None:
    spec = _load_spec(args.spec)
    series = dataset.read_csv(args.in_path)
    rated = []
    for m in series.records:
        weather = thermal.WeatherPoint(
            ambient_temp_c=m.ambient_temp_c, wind_speed_ms=m.wind_speed_ms,
            humidity_pct=m.humidity_pct, irradiance_wm2=m.irradiance_wm2)
        rated.append(dataclasses.replace(m, dlr_a=thermal.solve_ampacity(spec, weather)))
    dataset.write_csv(dataset.TimeSeries(tuple(rated)), args.out)
    print(f"[dlrkit] rated {len(rated)} records into {args.out}", file=sys.stderr)


def _cmd_train(args) -> None:
    try:
        cfg = model_mod.ModelConfig(
            case_tag=args.case, window_len=args.window, hidden_dim=args.hidden,
            epochs=args.epochs, learning_rate=args.lr, batch_size=args.batch,
            seed=args.seed, early_stop_patience=args.patience)
        if not 0.0 < args.train_frac < 1.0:
            raise ValueError(f"train-frac must be in (0, 1), got {args.train_frac}")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    series = dataset.read_csv(args.data)
    train_ts, _ = dataset.chronological_split(series, args.train_frac)
    norm = dataset.fit_normalizer(train_ts)
    windows = dataset.make_windows(train_ts, norm, cfg.case_tag, cfg.window_len)
    model = model_mod.build_model(cfg)
    model, report = model_mod.train(model, windows, cfg)
    # eval needs the same split boundary later; carry it in the document
    model.metadata["train_frac"] = args.train_frac
    model_mod.save_model(model, args.out)
    best = f", best val MSE {min(report.val_mse):.6f} at epoch {report.best_epoch}" \
        if report.val_mse else ""
    print(f"[dlrkit] case {cfg.case_tag}: {report.epochs_run} epochs in "
          f"{report.wall_time_s:.1f}s, final train MSE "
          f"{report.train_mse[-1]:.6f}{best}; saved to {args.out}", file=sys.stderr)


def _cmd_eval(args) -> None:
    if (args.compare is None) != (args.compare_out is None):
        raise UsageError("--compare and --compare-out must be given together")
    model = model_mod.load_model(args.model)
    series = dataset.read_csv(args.data)
    train_frac = model.metadata.get("train_frac")
    if not isinstance(train_frac, float) or not 0.0 < train_frac < 1.0:
        raise DataError(f"model file {args.model!r} lacks a usable train_frac; "
                        "cannot reproduce the chronological split")
    _, test_ts = dataset.chronological_split(series, train_frac)
    report = metrics.evaluate(model, test_ts)
    metrics.write_report(report, args.report)
    print(f"[dlrkit] case {report.case_tag} on {report.n_samples} test windows: "
          f"MSE {report.mse:.4f} A^2, MAE {report.mae:.4f} A, "
          f"R^2 {report.r_squared:.4f} ({report.accuracy_pct:.2f}%)", file=sys.stderr)
    if args.compare is not None:
        other = metrics.read_report(args.compare)
        metrics.write_comparison(other, report, args.compare_out)
        print(f"[dlrkit] comparison written to {args.compare_out}", file=sys.stderr)


def _cmd_forecast(args) -> None:
    model = model_mod.load_model(args.model)
    series = dataset.read_csv(args.data)
    cfg = model.config
    ds = dataset.make_windows(series, model.normalizer, cfg.case_tag, cfg.window_len)
    preds_norm = np.empty(len(ds))
    for start in range(0, len(ds), 512):
        batch, _ = model_mod.forward_batch(model, ds.inputs[start:start + 512])
        preds_norm[start:start + 512] = batch
    preds = model.normalizer.denormalize_dlr(preds_norm)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("timestamp,dlr_pred_a\n")
        for k, value in enumerate(preds):
            ts = series[k + cfg.window_len].timestamp
            fh.write(f"{dataset.format_timestamp(ts)},{float(value)!r}\n")
    print(f"[dlrkit] wrote {len(preds)} forecasts to {args.out}", file=sys.stderr)


def _cmd_plot(args) -> None:
    svgplot.plot_files(args.actual, args.pred, args.pred2, args.out)
    print(f"[dlrkit] chart written to {args.out}", file=sys.stderr)


_DISPATCH = {
    "gen": _cmd_gen,
    "rate": _cmd_rate,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "forecast": _cmd_forecast,
    "plot": _cmd_plot,
}


def run(argv: list[str]) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand (gen, rate, train, eval, "
                             "forecast, plot)")
        _announce(args)
        _DISPATCH[args.command](args)
        return 0
    except UsageError as exc:
        print(f"dlrkit: usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, ValueError) as exc:
        print(f"dlrkit: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"dlrkit: numerical failure: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run(sys.argv[1:]))
