"""Seeded synthetic stand-in for a pumped seawater intake.

The generator produces four minute-sampled series with the roles used
throughout the package:

* ``sea_level`` (past covariate): a slow AR(1) weather surge on top of two
  small tidal constituents (a microtidal coast).
* ``temperature`` (past covariate): seasonal and diurnal sinusoids.
* ``pump_effect`` (future covariate, percent): on/off duty cycle with
  exponentially distributed switch times and a random level per on-period.
* ``water_intake_level`` (target): first-order lag towards a saturating
  equilibrium driven by sea level and pump drawdown, with occasional step
  shocks and a fast AR(1) fluctuation (intake sloshing) on top.

The defaults are not calibrated to a real site. They put the target near a
mean of 185 with a standard deviation near 50, with most variance driven by
the pump, which is known ahead of time.
"""
from dataclasses import asdict, dataclass

import numpy as np

from ..exceptions import ConfigurationError
from .frame import TimeSeriesFrame

TARGET = "water_intake_level"
PAST = ("sea_level", "temperature")
FUTURE = ("pump_effect",)


@dataclass(frozen=True)
class SyntheticConfig:
    days: float = 30.0
    step_seconds: int = 60
    start: int = 1704067200  # 2024-01-01T00:00:00Z
    tide_amplitudes: tuple = (4.0, 2.0)
    tide_periods_hours: tuple = (12.42, 12.0)
    surge_std: float = 10.0
    surge_hours: float = 36.0
    temperature_mean: float = 7.0
    temperature_amplitude: float = 4.0
    temperature_period_days: float = 365.0
    temperature_diurnal: float = 0.3
    pump_on_minutes: float = 60.0
    pump_off_minutes: float = 30.0
    pump_levels: tuple = (60.0, 100.0)
    base_level: float = 280.0
    sea_gain: float = 1.0
    pump_drawdown: float = 200.0
    response_minutes: float = 15.0
    saturation: tuple = (60.0, 410.0)
    shocks_per_day: float = 1.0
    shock_scale: float = 10.0
    shock_minutes: tuple = (20.0, 180.0)
    fluctuation_std: float = 3.0
    fluctuation_minutes: float = 10.0
    noise_level: float = 1.0
    target_noise: float = 1.5
    sea_noise: float = 1.0
    temperature_noise: float = 0.05

    def validate(self):
        if not self.days > 0:
            raise ConfigurationError(f"duration must be positive, got {self.days} days")
        if self.step_seconds <= 0:
            raise ConfigurationError("step_seconds must be positive")
        if self.response_minutes <= 0:
            raise ConfigurationError("response_minutes must be positive")
        lo, hi = self.saturation
        if not hi > lo:
            raise ConfigurationError("saturation must be an increasing (low, high) pair")
        if self.noise_level < 0:
            raise ConfigurationError("noise_level must be non-negative")
        return self

    def to_dict(self):
        return asdict(self)


def _ar1(rng, n, std, timescale_steps):
    if std == 0:
        return np.zeros(n)
    phi = np.exp(-1.0 / timescale_steps)
    innov = rng.normal(0.0, std * np.sqrt(1 - phi**2), n)
    out = np.empty(n)
    out[0] = rng.normal(0.0, std)
    for i in range(1, n):
        out[i] = phi * out[i - 1] + innov[i]
    return out


def _pump(rng, cfg, n, minutes_per_step):
    out = np.zeros(n)
    if cfg.pump_on_minutes <= 0:
        return out
    pos, on = 0, bool(rng.random() < cfg.pump_on_minutes / (cfg.pump_on_minutes + cfg.pump_off_minutes))
    while pos < n:
        mean = cfg.pump_on_minutes if on else cfg.pump_off_minutes
        length = max(1, int(round(rng.exponential(mean) / minutes_per_step))) if mean > 0 else n
        if on:
            out[pos:pos + length] = rng.uniform(*cfg.pump_levels)
        pos += length
        on = not on if cfg.pump_off_minutes > 0 else True
    return out


def _shocks(rng, cfg, n, minutes_per_step):
    out = np.zeros(n)
    expected = cfg.shocks_per_day * n * minutes_per_step / 1440.0
    for _ in range(rng.poisson(expected) if expected > 0 else 0):
        start = rng.integers(0, n)
        length = max(1, int(round(rng.uniform(*cfg.shock_minutes) / minutes_per_step)))
        out[start:start + length] += rng.normal(0.0, cfg.shock_scale)
    return out


def _saturate(v, low, high):
    mid, half = (low + high) / 2.0, (high - low) / 2.0
    return mid + half * np.tanh((v - mid) / half)


def generate_synthetic(config=None, seed=0):
    """Generate one contiguous frame per config as a list.

    Parameters
    ----------
    config : SyntheticConfig, optional
    seed : int

    Returns
    -------
    list of TimeSeriesFrame
    """
    cfg = (config or SyntheticConfig()).validate()
    rng = np.random.default_rng(seed)
    step = int(cfg.step_seconds)
    n = int(round(cfg.days * 86400 / step))
    if n < 1:
        raise ConfigurationError("duration is shorter than one sampling step")
    minutes_per_step = step / 60.0
    t_hours = np.arange(n) * step / 3600.0
    noise = cfg.noise_level

    sea = np.zeros(n)
    for amp, period in zip(cfg.tide_amplitudes, cfg.tide_periods_hours):
        sea += amp * np.sin(2 * np.pi * t_hours / period + rng.uniform(0, 2 * np.pi))
    sea += _ar1(rng, n, cfg.surge_std, cfg.surge_hours * 3600 / step)

    phase = rng.uniform(0, 2 * np.pi)
    temperature = (
        cfg.temperature_mean
        + cfg.temperature_amplitude * np.sin(2 * np.pi * t_hours / (24 * cfg.temperature_period_days) + phase)
        + cfg.temperature_diurnal * np.sin(2 * np.pi * t_hours / 24.0)
    )

    pump = _pump(rng, cfg, n, minutes_per_step)
    shocks = _shocks(rng, cfg, n, minutes_per_step)

    equilibrium = _saturate(
        cfg.base_level + cfg.sea_gain * sea - cfg.pump_drawdown * pump / 100.0 + shocks, *cfg.saturation
    )
    gain = 1.0 - np.exp(-minutes_per_step / cfg.response_minutes)
    level = np.empty(n)
    level[0] = equilibrium[0]
    for i in range(1, n):
        level[i] = level[i - 1] + gain * (equilibrium[i - 1] - level[i - 1])

    fluctuation = _ar1(rng, n, cfg.fluctuation_std * noise, cfg.fluctuation_minutes / minutes_per_step)
    target = level + fluctuation + rng.normal(0.0, cfg.target_noise * noise, n)
    sea_obs = sea + rng.normal(0.0, cfg.sea_noise * noise, n)
    temp_obs = temperature + rng.normal(0.0, cfg.temperature_noise * noise, n)
    stamps = cfg.start + step * np.arange(n, dtype=np.int64)
    frame = TimeSeriesFrame(
        stamps,
        target,
        {"sea_level": sea_obs, "temperature": temp_obs},
        {"pump_effect": pump},
        step,
        TARGET,
    )
    return [frame]
