"""Synthetic environment scenes for the two demo scenarios.

Both scenarios use a 1-D range profile of ``n`` bins.

* ``tumor``: Gaussian background clutter plus, for label 1, a sine-windowed
  pulse (the target echo) at a seeded position.
* ``sludge``: a non-negative height profile across the tank floor whose
  trapezoidal integral equals the requested volume.  The ``n`` bins sample a
  floor of length ``n``, so the grid spacing is ``n / (n - 1)`` and a flat
  profile of volume ``V`` has height ``V / n`` everywhere.
"""
import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from ._rng import substream
from .exceptions import ConfigurationError, DimensionError, DomainError
from .io import fmt


class Scenario(str, enum.Enum):
    TUMOR = "tumor"
    SLUDGE = "sludge"


SLUDGE_SHAPES = ("flat", "mound", "tilted", "bimodal")


@dataclass(frozen=True)
class ScenarioConfig:
    """Scene generator settings.

    ``pulse_width`` defaults to ``min(8, n)``.  ``target_lo``/``target_hi``
    bound the first bin of the tumor pulse (inclusive); ``None`` means the full
    valid range ``[0, n - pulse_width]``.
    """

    n: int = 64
    clutter_level: float = 0.0
    signature_amplitude: float = 1.0
    profile_count: int = 4
    noise_free: bool = False
    pulse_width: int | None = None
    target_lo: int | None = None
    target_hi: int | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"n must be an integer >= 2, got {self.n}", key="n")
        if not np.isfinite(self.clutter_level) or self.clutter_level < 0:
            raise ConfigurationError(
                f"clutter_level must be finite and >= 0, got {self.clutter_level}", key="clutter_level")
        if not np.isfinite(self.signature_amplitude) or self.signature_amplitude <= 0:
            raise ConfigurationError(
                f"signature_amplitude must be > 0, got {self.signature_amplitude}",
                key="signature_amplitude")
        if self.pulse_width is None:
            object.__setattr__(self, "pulse_width", min(8, int(self.n)))
        if self.profile_count < 1:
            raise ConfigurationError("profile_count must be >= 1", key="profile_count")
        if not 1 <= self.pulse_width <= self.n:
            raise ConfigurationError(
                f"pulse_width must lie in [1, n], got {self.pulse_width}", key="pulse_width")
        lo, hi = self.target_range
        if not 0 <= lo <= hi <= self.n - self.pulse_width:
            raise ConfigurationError(
                f"target range [{lo}, {hi}] outside [0, {self.n - self.pulse_width}]",
                key="target_lo")

    @property
    def target_range(self):
        lo = 0 if self.target_lo is None else int(self.target_lo)
        hi = self.n - self.pulse_width if self.target_hi is None else int(self.target_hi)
        return lo, hi


@dataclass(frozen=True)
class EnvironmentScene:
    e: np.ndarray = field(repr=False)
    truth: float
    scenario: Scenario
    seed: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.e)):
            raise DomainError("scene vector contains non-finite entries")
        self.e.flags.writeable = False

    @property
    def n(self):
        return self.e.shape[0]


def pulse_window(width):
    """Sine window of ``width`` taps; every tap is strictly positive."""
    i = np.arange(width)
    return np.sin(np.pi * (i + 0.5) / width)


def gen_tumor_scene(cfg, label, seed, amplitude=None):
    """Clutter plus an optional target echo.

    The clutter vector and the pulse position are drawn from the same seeded
    stream in that order, regardless of ``label``, so scenes with equal seeds
    share their clutter.  ``amplitude`` overrides ``cfg.signature_amplitude``
    (used by the resolution channels; it may be 0).
    """
    if label not in (0, 1):
        raise DomainError(f"label must be 0 or 1, got {label}")
    amp = cfg.signature_amplitude if amplitude is None else float(amplitude)
    if amp < 0 or not np.isfinite(amp):
        raise DomainError(f"amplitude must be finite and >= 0, got {amp}")

    rng = substream(seed)
    clutter = rng.standard_normal(cfg.n)
    lo, hi = cfg.target_range
    pos = int(rng.integers(lo, hi + 1))

    if cfg.noise_free or cfg.clutter_level == 0:
        e = np.zeros(cfg.n)
    else:
        e = cfg.clutter_level * clutter
    if label == 1:
        e[pos:pos + cfg.pulse_width] += amp * pulse_window(cfg.pulse_width)
    return EnvironmentScene(e=e, truth=float(label), scenario=Scenario.TUMOR, seed=int(seed))


def trapezoid_volume(heights):
    """Trapezoidal integral of a height profile on the tank grid (spacing n/(n-1))."""
    h = np.asarray(heights, dtype=float)
    n = h.shape[0]
    dx = n / (n - 1)
    return dx * (h.sum() - 0.5 * (h[0] + h[-1]))


def _sludge_shape(kind, x, rng):
    # x in [0, 1]; returns a non-negative, not identically zero shape.
    if kind == "flat":
        return np.ones_like(x)
    if kind == "mound":
        c = rng.uniform(0.3, 0.7)
        w = rng.uniform(0.12, 0.25)
        return np.exp(-0.5 * ((x - c) / w) ** 2)
    if kind == "tilted":
        slope = rng.uniform(0.5, 2.0)
        ramp = 0.2 + slope * x
        return ramp if rng.random() < 0.5 else ramp[::-1].copy()
    c1 = rng.uniform(0.15, 0.35)
    c2 = rng.uniform(0.65, 0.85)
    w = rng.uniform(0.08, 0.15)
    ratio = rng.uniform(0.5, 1.0)
    return np.exp(-0.5 * ((x - c1) / w) ** 2) + ratio * np.exp(-0.5 * ((x - c2) / w) ** 2)


def gen_sludge_scene(cfg, volume, profile_index, seed):
    """Height profile of the given volume; ``profile_index`` picks the shape family.

    Families cycle through flat, mound, tilted and bimodal.  Shape parameters
    (mound centre, tilt direction, ...) are drawn from the seed.  Sludge scenes
    carry no clutter so the volume is exact.
    """
    volume = float(volume)
    if not np.isfinite(volume) or volume < 0:
        raise DomainError(f"volume must be finite and >= 0, got {volume}")
    if not 0 <= profile_index < cfg.profile_count:
        raise DomainError(
            f"profile_index must lie in [0, {cfg.profile_count}), got {profile_index}")

    kind = SLUDGE_SHAPES[profile_index % len(SLUDGE_SHAPES)]
    if volume == 0:
        e = np.zeros(cfg.n)
    else:
        x = np.linspace(0.0, 1.0, cfg.n)
        shape = _sludge_shape(kind, x, substream(seed))
        e = shape * (volume / trapezoid_volume(shape))
    return EnvironmentScene(e=e, truth=volume, scenario=Scenario.SLUDGE, seed=int(seed))


def scenes_to_arrays(scenes):
    """Stack scenes into ``(E, truth)`` arrays."""
    if not scenes:
        raise DimensionError("no scenes")
    n = scenes[0].n
    if any(s.n != n for s in scenes):
        raise DimensionError("scenes have differing dimensions")
    return np.stack([s.e for s in scenes]), np.array([s.truth for s in scenes])


def write_scenes_csv(path, scenes):
    n = scenes[0].n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "seed", "truth"] + [f"e_{i}" for i in range(n)])
        for s in scenes:
            w.writerow([s.scenario.value, s.seed, fmt(s.truth)] + [fmt(v) for v in s.e])


def read_scenes_csv(path):
    scenes = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            scenes.append(EnvironmentScene(
                e=np.array([float(v) for v in row[3:]]),
                truth=float(row[2]),
                scenario=Scenario(row[0]),
                seed=int(row[1]),
            ))
    return scenes
