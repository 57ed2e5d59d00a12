"""Sensor time series: CSV ingestion, normalization, windowing, splitting.

The canonical CSV schema is bit-exact: UTF-8, LF line endings, header

    timestamp,ambient_temp_c,cable_temp_c,wind_speed_ms,humidity_pct,irradiance_wm2,current_a,dlr_a

with ISO-8601 UTC timestamps (``2024-01-01T00:15:00Z``) on a strict regular
grid. Numbers are written with shortest round-trip decimal representation,
so write -> read reproduces every float bitwise.

Model inputs use the fixed feature order ``FEATURE_ORDER``; the univariate
case (case 1) sees only the leading ``dlr_a`` column, the multivariate case
(case 2) all six.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import DataError

#: Feature order for model input matrices. dlr_a must stay first: targets and
#: the case-1 column selection both index it.
FEATURE_ORDER = ("dlr_a", "ambient_temp_c", "wind_speed_ms", "humidity_pct",
                 "cable_temp_c", "irradiance_wm2")

CSV_HEADER = ("timestamp,ambient_temp_c,cable_temp_c,wind_speed_ms,"
              "humidity_pct,irradiance_wm2,current_a,dlr_a")

_TIMESTAMP_FMT = "%Y-%m-%dT%H:%M:%SZ"


def format_timestamp(ts: datetime) -> str:
    return ts.strftime(_TIMESTAMP_FMT)


def parse_timestamp(text: str) -> datetime:
    return datetime.strptime(text, _TIMESTAMP_FMT).replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class Measurement:
    """One timestamped sensor record."""

    timestamp: datetime
    ambient_temp_c: float
    cable_temp_c: float
    wind_speed_ms: float
    humidity_pct: float
    irradiance_wm2: float
    current_a: float
    dlr_a: float

    def __post_init__(self):
        numeric = (self.ambient_temp_c, self.cable_temp_c, self.wind_speed_ms,
                   self.humidity_pct, self.irradiance_wm2, self.current_a, self.dlr_a)
        if not all(math.isfinite(v) for v in numeric):
            raise ValueError("measurement fields must be finite")
        if self.dlr_a < 0:
            raise ValueError(f"dlr_a must be >= 0, got {self.dlr_a}")
        if self.wind_speed_ms < 0:
            raise ValueError(f"wind_speed_ms must be >= 0, got {self.wind_speed_ms}")
        if self.irradiance_wm2 < 0:
            raise ValueError(f"irradiance_wm2 must be >= 0, got {self.irradiance_wm2}")
        if not 0.0 <= self.humidity_pct <= 100.0:
            raise ValueError(f"humidity_pct must be in [0, 100], got {self.humidity_pct}")

    def feature(self, name: str) -> float:
        return getattr(self, name)


@dataclass(frozen=True)
class TimeSeries:
    """Ordered sensor records on a strict regular grid."""

    records: tuple[Measurement, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if len(self.records) < 2:
            raise ValueError(f"time series needs >= 2 records, got {len(self.records)}")
        step = self.records[1].timestamp - self.records[0].timestamp
        if step <= timedelta(0):
            raise ValueError("timestamps must be strictly increasing")
        for i in range(1, len(self.records)):
            gap = self.records[i].timestamp - self.records[i - 1].timestamp
            if gap != step:
                raise ValueError(
                    f"irregular grid at record {i}: spacing {gap} != {step}")

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return TimeSeries(self.records[idx])
        return self.records[idx]

    @property
    def step(self) -> timedelta:
        return self.records[1].timestamp - self.records[0].timestamp

    def timestamps(self) -> list[datetime]:
        return [m.timestamp for m in self.records]

    def feature_matrix(self) -> np.ndarray:
        """N x 6 float64 matrix in ``FEATURE_ORDER``."""
        return np.array([[m.feature(name) for name in FEATURE_ORDER]
                         for m in self.records], dtype=np.float64)


def read_csv(path: str) -> TimeSeries:
    """Parse a canonical CSV file into a validated TimeSeries.

    Errors carry 1-based file line numbers (the header is line 1).
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path!r}: {exc}") from exc

    if not lines or lines[0] != CSV_HEADER:
        found = lines[0] if lines else "<empty file>"
        raise DataError(
            f"{path}:1: malformed header; expected {CSV_HEADER!r}, got {found!r}")

    records: list[Measurement] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            raise DataError(f"{path}:{lineno}: blank line inside data")
        fields = line.split(",")
        if len(fields) != 8:
            raise DataError(f"{path}:{lineno}: expected 8 columns, got {len(fields)}")
        try:
            ts = parse_timestamp(fields[0])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad timestamp {fields[0]!r}") from exc
        values = []
        for name, text in zip(CSV_HEADER.split(",")[1:], fields[1:]):
            try:
                v = float(text)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: unparsable {name} value {text!r}") from exc
            if not math.isfinite(v):
                raise DataError(f"{path}:{lineno}: non-finite {name} value {text!r}")
            values.append(v)
        try:
            records.append(Measurement(ts, *values))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc

    if len(records) < 2:
        raise DataError(f"{path}: need >= 2 data rows, got {len(records)}")

    step = records[1].timestamp - records[0].timestamp
    for i in range(1, len(records)):
        lineno = i + 2
        prev, cur = records[i - 1], records[i]
        if cur.timestamp <= prev.timestamp:
            raise DataError(
                f"{path}:{lineno}: timestamp {format_timestamp(cur.timestamp)} is not "
                f"after {format_timestamp(prev.timestamp)} (out of order or duplicate)")
        if cur.timestamp - prev.timestamp != step:
            raise DataError(
                f"{path}:{lineno}: grid spacing violation; expected {step}, "
                f"got {cur.timestamp - prev.timestamp}")
    return TimeSeries(tuple(records))


def write_csv(ts: TimeSeries, path: str) -> None:
    """Write the canonical CSV: LF endings, shortest round-trip floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for m in ts.records:
            fh.write(",".join((
                format_timestamp(m.timestamp),
                repr(m.ambient_temp_c), repr(m.cable_temp_c), repr(m.wind_speed_ms),
                repr(m.humidity_pct), repr(m.irradiance_wm2), repr(m.current_a),
                repr(m.dlr_a),
            )) + "\n")


def chronological_split(ts: TimeSeries, train_frac: float) -> tuple[TimeSeries, TimeSeries]:
    """First floor(train_frac * N) records to train, remainder to test.

    No shuffling; both sides keep the original grid.
    """
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must be in (0, 1), got {train_frac}")
    n = len(ts)
    if n < 10:
        raise DataError(f"series too small to split meaningfully: {n} records")
    k = math.floor(train_frac * n)
    if k < 2 or n - k < 2:
        raise DataError(
            f"split at {k}/{n} leaves a side with fewer than 2 records")
    return ts[:k], ts[k:]


@dataclass(frozen=True)
class Normalizer:
    """Per-feature z-score statistics fitted on training rows only."""

    features: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    count: int

    def __post_init__(self):
        if self.mean.shape != (len(self.features),) or self.std.shape != self.mean.shape:
            raise ValueError("normalizer statistics shape mismatch")
        if np.any(self.std <= 0):
            raise ValueError("normalizer std must be positive")

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def inverse_transform(self, x: np.ndarray) -> np.ndarray:
        return x * self.std + self.mean

    def denormalize_dlr(self, y):
        """Map normalized DLR predictions back to amps (dlr_a is feature 0)."""
        return y * self.std[0] + self.mean[0]

    def to_dict(self) -> dict:
        return {"features": list(self.features), "mean": self.mean.tolist(),
                "std": self.std.tolist(), "count": self.count}

    @classmethod
    def from_dict(cls, d: dict) -> "Normalizer":
        return cls(features=tuple(d["features"]),
                   mean=np.asarray(d["mean"], dtype=np.float64),
                   std=np.asarray(d["std"], dtype=np.float64),
                   count=int(d["count"]))


def fit_normalizer(train: TimeSeries) -> Normalizer:
    """Mean and population standard deviation per feature over train rows."""
    x = train.feature_matrix()
    mean = x.mean(axis=0)
    std = x.std(axis=0)  # population (ddof=0)
    for j, name in enumerate(FEATURE_ORDER):
        if std[j] < 1e-12:
            raise DataError(f"constant feature {name!r} (std {std[j]:g}); cannot normalize")
    return Normalizer(features=FEATURE_ORDER, mean=mean, std=std, count=len(train))


@dataclass(frozen=True)
class WindowedDataset:
    """Supervised (window -> next-step DLR) pairs, plus their Normalizer.

    ``inputs`` is (num, n, d) with d = 1 for case 1 and d = 6 for case 2;
    ``targets`` holds the normalized dlr_a of the record right after each
    window.
    """

    case_tag: int
    window_len: int
    inputs: np.ndarray
    targets: np.ndarray
    normalizer: Normalizer = field(repr=False)

    def __post_init__(self):
        expected_d = 1 if self.case_tag == 1 else len(FEATURE_ORDER)
        num = self.inputs.shape[0]
        if self.inputs.shape != (num, self.window_len, expected_d):
            raise ValueError(f"inputs shape {self.inputs.shape} inconsistent with "
                             f"case {self.case_tag}, n={self.window_len}")
        if self.targets.shape != (num,):
            raise ValueError("inputs and targets must have equal length")

    def __len__(self) -> int:
        return len(self.targets)


def make_windows(ts: TimeSeries, norm: Normalizer, case_tag: int,
                 n: int) -> WindowedDataset:
    """Build the sliding-window supervised pairs for one case.

    Window k covers records [k, k+n); its target is the normalized dlr_a of
    record k+n. Case 1 inputs are n x 1 (DLR history only), case 2 inputs
    n x 6 in ``FEATURE_ORDER``.
    """
    if case_tag not in (1, 2):
        raise ValueError(f"case_tag must be 1 or 2, got {case_tag}")
    if n < 2:
        raise ValueError(f"window length must be >= 2, got {n}")
    if len(ts) < n + 1:
        raise DataError(f"series of length {len(ts)} too short for window {n} "
                        "(need at least n + 1 records)")
    xn = norm.transform(ts.feature_matrix())
    cols = slice(0, 1) if case_tag == 1 else slice(None)
    num = len(ts) - n
    inputs = np.stack([xn[k:k + n, cols] for k in range(num)])
    targets = xn[n:, 0].copy()
    return WindowedDataset(case_tag=case_tag, window_len=n,
                           inputs=np.ascontiguousarray(inputs),
                           targets=targets, normalizer=norm)
