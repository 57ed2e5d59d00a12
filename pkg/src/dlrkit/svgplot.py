"""Static SVG line charts for actual-vs-predicted DLR series.

The renderer is deliberately hand-rolled: no plotting library emits
byte-stable output, and the chart contract is simple — one ``<polyline>``
per data series, fixed colors, axes, tick labels and a legend. All
coordinates are formatted with two decimals so repeated runs produce
identical bytes.
"""

from __future__ import annotations

from datetime import datetime

from .dataset import parse_timestamp, read_csv
from .errors import DataError

WIDTH, HEIGHT = 960, 480
MARGIN_LEFT, MARGIN_RIGHT = 72, 24
MARGIN_TOP, MARGIN_BOTTOM = 48, 56

#: Series colors in draw order: actual, first prediction, second prediction.
COLORS = ("#1f77b4", "#d62728", "#2ca02c")

#: Value column names accepted in a prediction/actual CSV.
_VALUE_COLUMNS = ("dlr_pred_a", "dlr_a")


def read_value_series(path: str) -> list[tuple[datetime, float]]:
    """Read (timestamp, DLR) pairs from a canonical or forecast CSV.

    Canonical files use the full sensor schema; forecast files are
    ``timestamp,dlr_pred_a``. Either way the value column is located by name.
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path!r}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: empty file")
    header = lines[0].split(",")
    if not header or header[0] != "timestamp":
        raise DataError(f"{path}:1: first column must be 'timestamp'")
    col = next((header.index(c) for c in _VALUE_COLUMNS if c in header), None)
    if col is None:
        raise DataError(f"{path}:1: no DLR column (expected one of {_VALUE_COLUMNS})")
    points = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} columns, "
                            f"got {len(fields)}")
        try:
            ts = parse_timestamp(fields[0])
            value = float(fields[col])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
        points.append((ts, value))
    if len(points) < 2:
        raise DataError(f"{path}: need at least 2 rows to plot")
    return points


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(series: list[tuple[str, list[tuple[datetime, float]]]]) -> str:
    """Render labeled (timestamp, value) series to a self-contained SVG.

    The first series defines the x-range; every other series must stay
    within timestamps the first one covers.
    """
    if not series:
        raise ValueError("nothing to plot")
    base_times = [t for t, _ in series[0][1]]
    t0, t1 = base_times[0], base_times[-1]
    base_set = set(base_times)
    for label, points in series[1:]:
        for ts, _ in points:
            if ts not in base_set:
                raise DataError(
                    f"timestamp misalignment: {ts:%Y-%m-%dT%H:%M:%SZ} in series "
                    f"{label!r} is not present in {series[0][0]!r}")

    values = [v for _, pts in series for _, v in pts]
    vmin, vmax = min(values), max(values)
    if vmax - vmin < 1e-9:
        vmin, vmax = vmin - 1.0, vmax + 1.0
    pad = 0.05 * (vmax - vmin)
    vmin, vmax = vmin - pad, vmax + pad

    span_s = (t1 - t0).total_seconds()
    if span_s <= 0:
        raise DataError("x-range is empty; need increasing timestamps")
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def x_px(ts: datetime) -> float:
        return MARGIN_LEFT + plot_w * (ts - t0).total_seconds() / span_s

    def y_px(v: float) -> float:
        return MARGIN_TOP + plot_h * (1.0 - (v - vmin) / (vmax - vmin))

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
               f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')

    # axes
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h
    out.append(f'<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}" '
               'stroke="#333333" stroke-width="1"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{MARGIN_LEFT + plot_w}" y2="{y0}" '
               'stroke="#333333" stroke-width="1"/>')

    # y ticks: six evenly spaced values
    for i in range(6):
        v = vmin + (vmax - vmin) * i / 5.0
        y = y_px(v)
        out.append(f'<line x1="{x0 - 4}" y1="{_fmt(y)}" x2="{x0}" y2="{_fmt(y)}" '
                   'stroke="#333333" stroke-width="1"/>')
        out.append(f'<text x="{x0 - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{v:.1f}</text>')

    # x ticks: six evenly spaced timestamps labeled day+time
    for i in range(6):
        ts = t0 + (t1 - t0) * i / 5
        x = x_px(ts)
        out.append(f'<line x1="{_fmt(x)}" y1="{y0}" x2="{_fmt(x)}" y2="{y0 + 4}" '
                   'stroke="#333333" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(x)}" y="{y0 + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{ts:%m-%d %H:%M}</text>')

    out.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.0f}" y="{HEIGHT - 12}" '
               'text-anchor="middle" font-family="sans-serif" font-size="13">'
               'time (UTC)</text>')
    out.append(f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.0f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.0f})">DLR (A)</text>')

    # legend along the top edge
    lx = MARGIN_LEFT
    for idx, (label, _) in enumerate(series):
        color = COLORS[idx % len(COLORS)]
        out.append(f'<line x1="{lx}" y1="24" x2="{lx + 24}" y2="24" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="28" font-family="sans-serif" '
                   f'font-size="12">{label}</text>')
        lx += 30 + 9 * len(label) + 24

    # one polyline per series
    for idx, (label, points) in enumerate(series):
        color = COLORS[idx % len(COLORS)]
        coords = " ".join(f"{_fmt(x_px(ts))},{_fmt(y_px(v))}" for ts, v in points)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{coords}"/>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_files(actual_path: str, pred_path: str, pred2_path: str | None,
               out_path: str) -> None:
    """Chart an actual CSV against one or two prediction CSVs."""
    # full validation for the actual series; it anchors the x-axis
    actual_ts = read_csv(actual_path)
    actual = [(m.timestamp, m.dlr_a) for m in actual_ts.records]
    series = [("actual", actual), ("predicted", read_value_series(pred_path))]
    if pred2_path is not None:
        series.append(("predicted (alt)", read_value_series(pred2_path)))
    svg = render_svg(series)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(svg)
