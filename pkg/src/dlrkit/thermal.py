"""Steady-state conductor thermal model.

Ampacity (the dynamic line rating) comes from the steady-state heat balance
of an overhead conductor at its maximum design temperature T_max:

    I^2 * R(T_max) + q_sun  =  q_conv + q_rad          [W/m]

with a linearized convection law, Stefan-Boltzmann radiation and direct
solar gain:

    q_conv = (lam_nat + lam_forced * sqrt(V)) * (T_c - T_a)
    q_rad  = pi * D * emissivity * sigma_sb * ((T_c + 273.15)^4 - (T_a + 273.15)^4)
    q_sun  = absorptivity * D * G

where V is wind speed [m/s], T_a ambient temperature [degC], D conductor
diameter [m] and G global irradiance [W/m^2]. The balance is linear in I^2,
so ampacity has a closed form; the inverse problem (conductor temperature at
a given current) is genuinely nonlinear and is solved by bisection.

Humidity is deliberately not an input to the thermal model. It is carried
through the data pipeline as a forecasting feature only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError, NumericalError

#: Stefan-Boltzmann constant [W/(m^2 K^4)].
STEFAN_BOLTZMANN = 5.670374419e-8

#: Natural-convection coefficient [W/(m K)].
LAMBDA_NATURAL = 2.0

#: Forced-convection coefficient [W/(m K (m/s)^0.5)].
LAMBDA_FORCED = 6.0

#: Bisection stops when |residual| < this [W/m] or after the iteration cap.
BISECTION_TOLERANCE = 1e-9
BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class ConductorSpec:
    """Electrical and thermal properties of one overhead conductor.

    Defaults describe a small ACSR distribution conductor (about 35 mm^2
    aluminum section): 7.5 mm diameter, 0.85 mOhm/m at 20 degC, 75 degC
    design temperature.
    """

    diameter_m: float = 0.0075
    resistance_ref_ohm_per_m: float = 8.5e-4
    ref_temp_c: float = 20.0
    alpha_per_c: float = 0.00403
    emissivity: float = 0.8
    absorptivity: float = 0.8
    max_conductor_temp_c: float = 75.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (
                self.diameter_m, self.resistance_ref_ohm_per_m, self.ref_temp_c,
                self.alpha_per_c, self.emissivity, self.absorptivity,
                self.max_conductor_temp_c)):
            raise ValueError("conductor spec fields must be finite")
        if self.diameter_m <= 0:
            raise ValueError(f"diameter_m must be > 0, got {self.diameter_m}")
        if self.resistance_ref_ohm_per_m <= 0:
            raise ValueError(
                f"resistance_ref_ohm_per_m must be > 0, got {self.resistance_ref_ohm_per_m}")
        if not 0.0 <= self.emissivity <= 1.0:
            raise ValueError(f"emissivity must be in [0, 1], got {self.emissivity}")
        if not 0.0 <= self.absorptivity <= 1.0:
            raise ValueError(f"absorptivity must be in [0, 1], got {self.absorptivity}")
        if self.max_conductor_temp_c <= -273.15:
            raise ValueError(
                f"max_conductor_temp_c must be above absolute zero, got {self.max_conductor_temp_c}")


@dataclass(frozen=True)
class WeatherPoint:
    """One weather observation at the line location."""

    ambient_temp_c: float
    wind_speed_ms: float
    humidity_pct: float
    irradiance_wm2: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (
                self.ambient_temp_c, self.wind_speed_ms, self.humidity_pct,
                self.irradiance_wm2)):
            raise ValueError("weather fields must be finite")
        if self.wind_speed_ms < 0:
            raise ValueError(f"wind_speed_ms must be >= 0, got {self.wind_speed_ms}")
        if self.irradiance_wm2 < 0:
            raise ValueError(f"irradiance_wm2 must be >= 0, got {self.irradiance_wm2}")
        if not 0.0 <= self.humidity_pct <= 100.0:
            raise ValueError(f"humidity_pct must be in [0, 100], got {self.humidity_pct}")


#: The documented default conductor, used wherever no spec file is given.
DEFAULT_SPEC = ConductorSpec()

#: Key names accepted in a conductor spec file, in documented order.
SPEC_FILE_KEYS = (
    "diameter_m", "resistance_ref_ohm_per_m", "ref_temp_c", "alpha_per_c",
    "emissivity", "absorptivity", "max_conductor_temp_c",
)


def resistance_at(spec: ConductorSpec, t_c: float) -> float:
    """AC resistance per meter at conductor temperature ``t_c`` [degC].

    Linear temperature model, floored at 10% of the reference resistance so
    extreme extrapolation never yields a vanishing or negative resistance.
    """
    if not t_c > -273.15:
        raise ValueError(f"conductor temperature below absolute zero: {t_c}")
    r = spec.resistance_ref_ohm_per_m * (1.0 + spec.alpha_per_c * (t_c - spec.ref_temp_c))
    return max(r, 0.1 * spec.resistance_ref_ohm_per_m)


def heat_losses(spec: ConductorSpec, w: WeatherPoint, t_cond_c: float,
                lam_nat: float = LAMBDA_NATURAL,
                lam_forced: float = LAMBDA_FORCED) -> tuple[float, float, float]:
    """Per-meter heat flows at conductor temperature ``t_cond_c``.

    Returns ``(q_conv, q_rad, q_sun)`` in W/m. Convection and radiation may
    be negative when the conductor is colder than ambient; callers rely on
    that for the inverse solve.
    """
    dt = t_cond_c - w.ambient_temp_c
    q_conv = (lam_nat + lam_forced * math.sqrt(w.wind_speed_ms)) * dt
    q_rad = (math.pi * spec.diameter_m * spec.emissivity * STEFAN_BOLTZMANN
             * ((t_cond_c + 273.15) ** 4 - (w.ambient_temp_c + 273.15) ** 4))
    q_sun = spec.absorptivity * spec.diameter_m * w.irradiance_wm2
    return q_conv, q_rad, q_sun


def solve_ampacity(spec: ConductorSpec, w: WeatherPoint,
                   lam_nat: float = LAMBDA_NATURAL,
                   lam_forced: float = LAMBDA_FORCED) -> float:
    """Steady-state ampacity [A] with the conductor at its design temperature.

    The heat balance is linear in I^2, so the rating is closed-form:

        I = sqrt((q_conv + q_rad - q_sun) / R(T_max))

    evaluated at T_max. When solar gain alone exceeds the available cooling
    the rating clamps to 0 A rather than erroring, which keeps batch rating
    total. Humidity never enters the computation.
    """
    q_conv, q_rad, q_sun = heat_losses(spec, w, spec.max_conductor_temp_c,
                                       lam_nat, lam_forced)
    net_cooling = q_conv + q_rad - q_sun
    if net_cooling < 0.0:
        return 0.0
    return math.sqrt(net_cooling / resistance_at(spec, spec.max_conductor_temp_c))


def solve_conductor_temp(spec: ConductorSpec, w: WeatherPoint, current_a: float,
                         lam_nat: float = LAMBDA_NATURAL,
                         lam_forced: float = LAMBDA_FORCED) -> float:
    """Equilibrium conductor temperature [degC] while carrying ``current_a``.

    Bisects the net-cooling residual

        f(t) = q_conv(t) + q_rad(t) - q_sun - I^2 * R(t)

    over ``[ambient - 5, ambient + 250]`` degC. f is strictly increasing in t
    for physical parameters (convective and radiative slopes dominate the
    resistance slope), so the root is unique. Stops when |f| falls below
    ``BISECTION_TOLERANCE`` or after ``BISECTION_MAX_ITER`` halvings.
    """
    if current_a < 0:
        raise ValueError(f"current_a must be >= 0, got {current_a}")

    def residual(t: float) -> float:
        q_conv, q_rad, q_sun = heat_losses(spec, w, t, lam_nat, lam_forced)
        return q_conv + q_rad - q_sun - current_a ** 2 * resistance_at(spec, t)

    lo = w.ambient_temp_c - 5.0
    hi = w.ambient_temp_c + 250.0
    f_lo = residual(lo)
    f_hi = residual(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise NumericalError(
            "conductor temperature bracket failure: residual has the same sign at "
            f"both ends (f({lo}) = {f_lo}, f({hi}) = {f_hi}) for current={current_a} A, "
            f"ambient={w.ambient_temp_c} degC, wind={w.wind_speed_ms} m/s, "
            f"irradiance={w.irradiance_wm2} W/m^2")

    mid = 0.5 * (lo + hi)
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        f_mid = residual(mid)
        if abs(f_mid) < BISECTION_TOLERANCE:
            return mid
        if f_mid < 0.0:
            lo = mid
        else:
            hi = mid
    return mid


def read_spec_file(path: str) -> ConductorSpec:
    """Load a conductor spec from a flat ``key=value`` text file.

    Recognized keys are exactly ``SPEC_FILE_KEYS``; missing keys fall back to
    the documented defaults. Blank lines and lines starting with ``#`` are
    ignored. Unknown or repeated keys are rejected.
    """
    values: dict[str, float] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read conductor spec file {path!r}: {exc}") from exc

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        if key not in SPEC_FILE_KEYS:
            raise DataError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise DataError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            value = float(text.strip())
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad number for {key!r}: {text.strip()!r}") from exc
        if not math.isfinite(value):
            raise DataError(f"{path}:{lineno}: non-finite value for {key!r}")
        values[key] = value

    try:
        return ConductorSpec(**values)
    except ValueError as exc:
        raise DataError(f"{path}: invalid conductor spec: {exc}") from exc
