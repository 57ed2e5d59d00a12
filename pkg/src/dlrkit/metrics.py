"""Forecast quality metrics and flat-text report documents.

All metrics are computed on denormalized amps. The headline accuracy
percentage is defined as 100 * R^2, the fraction of DLR variance the model
explains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import TimeSeries, make_windows
from .errors import DataError
from .model import Model, forward_batch


@dataclass(frozen=True)
class MetricsReport:
    """Test-set scores for one model."""

    case_tag: int
    n_samples: int
    mse: float
    mae: float
    r_squared: float
    accuracy_pct: float


def _check_pair(pred, actual, min_len: int = 1):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    actual = np.asarray(actual, dtype=np.float64).ravel()
    if pred.shape != actual.shape:
        raise ValueError(f"length mismatch: pred {pred.size}, actual {actual.size}")
    if pred.size < min_len:
        raise ValueError(f"need at least {min_len} samples, got {pred.size}")
    return pred, actual


def mse(pred, actual) -> float:
    """Mean squared difference [A^2]."""
    pred, actual = _check_pair(pred, actual)
    return float(np.mean((pred - actual) ** 2))


def mae(pred, actual) -> float:
    """Mean absolute difference [A]."""
    pred, actual = _check_pair(pred, actual)
    return float(np.mean(np.abs(pred - actual)))


def r_squared(pred, actual) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot about actual's mean."""
    pred, actual = _check_pair(pred, actual, min_len=2)
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    if ss_tot <= 0.0:
        raise ValueError("actual values have zero variance; R^2 undefined")
    ss_res = float(np.sum((actual - pred) ** 2))
    return 1.0 - ss_res / ss_tot


def evaluate(model: Model, test_ts: TimeSeries) -> MetricsReport:
    """Window the test series with the model's stored normalizer and score it.

    Predictions are denormalized to amps; actuals are the raw recorded DLR
    values, so every metric carries physical units.
    """
    if model.normalizer is None:
        raise ValueError("model has no normalizer; cannot evaluate")
    cfg = model.config
    ds = make_windows(test_ts, model.normalizer, cfg.case_tag, cfg.window_len)
    preds_norm = np.empty(len(ds))
    for start in range(0, len(ds), 512):
        batch, _ = forward_batch(model, ds.inputs[start:start + 512])
        preds_norm[start:start + 512] = batch
    preds = model.normalizer.denormalize_dlr(preds_norm)
    actual = np.array([m.dlr_a for m in test_ts.records[cfg.window_len:]])
    r2 = r_squared(preds, actual)
    return MetricsReport(case_tag=cfg.case_tag, n_samples=len(ds),
                         mse=mse(preds, actual), mae=mae(preds, actual),
                         r_squared=r2, accuracy_pct=100.0 * r2)


# ── flat-text report documents ──────────────────────────────────────────

_REPORT_FIELDS = ("case", "n_samples", "mse", "mae", "r_squared", "accuracy_pct")


def write_report(report: MetricsReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"case={report.case_tag}\n")
        fh.write(f"n_samples={report.n_samples}\n")
        fh.write(f"mse={report.mse!r}\n")
        fh.write(f"mae={report.mae!r}\n")
        fh.write(f"r_squared={report.r_squared!r}\n")
        fh.write(f"accuracy_pct={report.accuracy_pct!r}\n")


def read_report(path: str) -> MetricsReport:
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for raw in fh.read().splitlines():
                if not raw.strip():
                    continue
                key, _, text = raw.partition("=")
                values[key.strip()] = text.strip()
    except OSError as exc:
        raise DataError(f"cannot read report {path!r}: {exc}") from exc
    missing = [k for k in _REPORT_FIELDS if k not in values]
    if missing:
        raise DataError(f"report {path!r} missing fields: {missing}")
    try:
        report = MetricsReport(
            case_tag=int(values["case"]), n_samples=int(values["n_samples"]),
            mse=float(values["mse"]), mae=float(values["mae"]),
            r_squared=float(values["r_squared"]),
            accuracy_pct=float(values["accuracy_pct"]))
    except ValueError as exc:
        raise DataError(f"report {path!r} has a malformed field: {exc}") from exc
    if not all(math.isfinite(v) for v in (report.mse, report.mae, report.r_squared)):
        raise DataError(f"report {path!r} has non-finite metrics")
    return report


def write_comparison(report_a: MetricsReport, report_b: MetricsReport,
                     path: str) -> None:
    """Pair a case 1 and case 2 report into one comparison document."""
    by_case = {report_a.case_tag: report_a, report_b.case_tag: report_b}
    if set(by_case) != {1, 2}:
        raise ValueError("comparison needs one case 1 and one case 2 report, "
                         f"got cases {sorted(r.case_tag for r in (report_a, report_b))}")
    c1, c2 = by_case[1], by_case[2]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for tag, rep in (("case1", c1), ("case2", c2)):
            fh.write(f"{tag}_n_samples={rep.n_samples}\n")
            fh.write(f"{tag}_mse={rep.mse!r}\n")
            fh.write(f"{tag}_mae={rep.mae!r}\n")
            fh.write(f"{tag}_r_squared={rep.r_squared!r}\n")
            fh.write(f"{tag}_accuracy_pct={rep.accuracy_pct!r}\n")
        fh.write(f"mse_improvement={c1.mse - c2.mse!r}\n")
        fh.write(f"mae_improvement={c1.mae - c2.mae!r}\n")
        fh.write(f"r_squared_gain={c2.r_squared - c1.r_squared!r}\n")
