"""Seeded synthetic sensor data with diurnal and frontal structure.

Produces the qualitative cross-correlations seen on instrumented lines:
sunny middays are warm and dry, cable temperature follows solar gain and
loading, and the rating drops when it is hot, still and bright.

The weather follows a compact latent-state story:

- a persistent cloudiness state dims irradiance, makes the air more humid,
  and leads wind by two steps (gust fronts trail cloud bands, a standard
  convective-front pattern);
- a persistent ambient anomaly (warm and cool spells) rides on the diurnal
  wave and lowers humidity when positive;
- wind is AR(1) around its mean plus the lagged cloud forcing.

All randomness comes from one SplitMix64 stream; a (config, conductor) pair
always yields a bitwise-identical series. Per step the generator draws, in
fixed order: cloud innovation, ambient innovation, humidity noise, wind
innovation, load noise. Draws happen every step regardless of daylight so
streams stay aligned across config changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .dataset import Measurement, TimeSeries
from .errors import NumericalError
from .rng import SplitMix64
from .thermal import ConductorSpec, WeatherPoint, solve_ampacity, solve_conductor_temp

#: All generated series start here; fixed so golden files reproduce.
EPOCH = datetime(2024, 1, 1, 0, 0, 0, tzinfo=timezone.utc)

_MINUTES_PER_DAY = 1440
_SUNRISE_MINUTE = 360  # solar profile crosses zero at 06:00 and 18:00
_AMBIENT_LAG_MINUTES = 120  # air temperature peaks ~2 h after solar noon
_LOAD_PEAK_MINUTE = 1140  # evening demand peak at 19:00

# cloudiness: clamped AR(1) state in [0, 1]
_CLOUD_MEAN = 0.4
_CLOUD_AR_COEFF = 0.94
_CLOUD_NOISE = 0.08
#: wind picks up this many m/s per unit cloudiness, two steps later
_CLOUD_WIND_COUPLING = 1.5
_CLOUD_LAG_STEPS = 2

# ambient deviates from its diurnal wave by a persistent AR(1) anomaly
# (warm/cool spells), matching how temperature errors behave on real feeders
_AMBIENT_AR_COEFF = 0.90
_AMBIENT_NOISE_C = 0.2

_HUMIDITY_BASE_PCT = 80.0
_HUMIDITY_SUN_DROP_PCT = 35.0
_HUMIDITY_ANOMALY_DROP_PCT = 3.0  # warm spells read as drier air
_HUMIDITY_CLOUD_RISE_PCT = 12.0  # overcast air reads as more humid
_HUMIDITY_NOISE_PCT = 3.0

_WIND_NOISE_MS = 0.05
_LOAD_NOISE_A = 1.0


@dataclass(frozen=True)
class GenConfig:
    """Knobs for the synthetic weather/load generator."""

    days: int = 7
    seed: int = 42
    step_minutes: int = 15
    base_ambient_c: float = 27.0
    ambient_swing_c: float = 5.0
    irradiance_peak_wm2: float = 950.0
    cloud_noise: float = 0.6
    wind_mean_ms: float = 2.0
    wind_ar_coeff: float = 0.98
    load_base_a: float = 150.0
    load_swing_a: float = 60.0
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.days < 1:
            raise ValueError(f"days must be >= 1, got {self.days}")
        if self.seed < 0 or self.seed > (1 << 64) - 1:
            raise ValueError(f"seed must fit in u64, got {self.seed}")
        if self.step_minutes < 1 or _MINUTES_PER_DAY % self.step_minutes != 0:
            raise ValueError(
                f"step_minutes must divide 1440, got {self.step_minutes}")
        if not 0.0 <= self.cloud_noise <= 1.0:
            raise ValueError(f"cloud_noise must be in [0, 1], got {self.cloud_noise}")
        if not 0.0 <= self.wind_ar_coeff < 1.0:
            raise ValueError(f"wind_ar_coeff must be in [0, 1), got {self.wind_ar_coeff}")
        if not 0.0 <= self.noise_scale <= 1.0:
            raise ValueError(f"noise_scale must be in [0, 1], got {self.noise_scale}")


def _solar_profile(minute_of_day: int) -> float:
    """Clear-sky shape: 0 at 06:00/18:00, 1 at noon, negative overnight."""
    return math.sin(2.0 * math.pi * (minute_of_day - _SUNRISE_MINUTE) / _MINUTES_PER_DAY)


def generate(cfg: GenConfig, spec: ConductorSpec) -> TimeSeries:
    """Generate ``days * 1440 / step_minutes`` records starting at EPOCH."""
    rng = SplitMix64(cfg.seed)
    steps = cfg.days * _MINUTES_PER_DAY // cfg.step_minutes
    records = []
    wind_base_prev = cfg.wind_mean_ms
    ambient_anomaly = 0.0
    cloud_state = 0.0
    cloud_hist = [_CLOUD_MEAN] * _CLOUD_LAG_STEPS  # pre-history at the mean

    for k in range(steps):
        minute = (k * cfg.step_minutes) % _MINUTES_PER_DAY

        n_cloud = rng.normal()
        n_ambient = rng.normal()
        n_humid = rng.normal()
        n_wind = rng.normal()
        n_load = rng.normal()

        cloud_state = (_CLOUD_AR_COEFF * cloud_state
                       + _CLOUD_NOISE * cfg.noise_scale * n_cloud)
        cloudiness = min(1.0, max(0.0, _CLOUD_MEAN + cloud_state))

        # sun_frac: irradiance as a fraction of the clear-sky peak; exactly 0
        # whenever the profile is at or below the horizon
        profile = _solar_profile(minute)
        sun_frac = max(0.0, profile) * (1.0 - cfg.cloud_noise * cloudiness)
        irradiance = cfg.irradiance_peak_wm2 * sun_frac

        ambient_anomaly = (_AMBIENT_AR_COEFF * ambient_anomaly
                           + _AMBIENT_NOISE_C * cfg.noise_scale * n_ambient)
        ambient = (cfg.base_ambient_c
                   + cfg.ambient_swing_c
                   * _solar_profile(minute - _AMBIENT_LAG_MINUTES)
                   + ambient_anomaly)

        humidity = (_HUMIDITY_BASE_PCT - _HUMIDITY_SUN_DROP_PCT * sun_frac
                    - _HUMIDITY_ANOMALY_DROP_PCT * ambient_anomaly
                    + _HUMIDITY_CLOUD_RISE_PCT * (cloudiness - _CLOUD_MEAN)
                    + _HUMIDITY_NOISE_PCT * cfg.noise_scale * n_humid)
        humidity = min(100.0, max(20.0, humidity))

        # the AR base evolves on its own; the lagged cloud term rides on top
        # so a cloud band shifts wind without compounding through the AR loop
        wind_base = (cfg.wind_mean_ms
                     + cfg.wind_ar_coeff * (wind_base_prev - cfg.wind_mean_ms)
                     + _WIND_NOISE_MS * cfg.noise_scale * n_wind)
        wind_base_prev = wind_base
        wind = max(0.0, wind_base
                   + _CLOUD_WIND_COUPLING * (cloud_hist[0] - _CLOUD_MEAN))
        cloud_hist.append(cloudiness)
        cloud_hist.pop(0)

        load_phase = 2.0 * math.pi * (minute - _LOAD_PEAK_MINUTE + 360) / _MINUTES_PER_DAY
        current = (cfg.load_base_a + cfg.load_swing_a * math.sin(load_phase)
                   + _LOAD_NOISE_A * cfg.noise_scale * n_load)
        current = max(0.0, current)

        weather = WeatherPoint(ambient_temp_c=ambient, wind_speed_ms=wind,
                               humidity_pct=humidity, irradiance_wm2=irradiance)
        try:
            cable_temp = solve_conductor_temp(spec, weather, current)
        except NumericalError as exc:
            raise NumericalError(f"at generated step {k} "
                                 f"({EPOCH + timedelta(minutes=k * cfg.step_minutes):%Y-%m-%dT%H:%M:%SZ}): "
                                 f"{exc}") from exc
        dlr = solve_ampacity(spec, weather)

        records.append(Measurement(
            timestamp=EPOCH + timedelta(minutes=k * cfg.step_minutes),
            ambient_temp_c=ambient, cable_temp_c=cable_temp,
            wind_speed_ms=wind, humidity_pct=humidity,
            irradiance_wm2=irradiance, current_a=current, dlr_a=dlr))

    return TimeSeries(tuple(records))
