"""Resolution figures of merit.

* Neyman-Pearson resolution: the largest shift ``dtheta`` of the artifact
  value for which the detector's false-present rate moves by at most
  ``epsilon``.
* Cramer-Rao resolution: the largest shift for which the Fisher information
  moves by at most ``epsilon``.

Both sweep a uniform ``dtheta`` grid with common random numbers (every grid
point reuses the same noise draws) and report the longest prefix of grid
points whose statistic stays within ``epsilon``.

Fisher information is estimated by Monte Carlo: draws ``zeta ~ channel(theta)``
are scored with a central difference of the Gaussian log-likelihood
``l(zeta; theta)`` around the channel mean ``mu(theta)`` and the squared
scores are averaged.
"""
import csv
import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from ._rng import derive_seeds, substream
from ._validation import check_vector
from .correlator import correlate
from .exceptions import (
    ConfigurationError,
    DegenerateLikelihoodError,
    DimensionError,
    InsufficientDataError,
    NumericalStepError,
)
from .interpreter import wilson_interval
from .io import fmt
from .scenegen import gen_sludge_scene, gen_tumor_scene
from .sensing import apply_asin

MIN_MC = 100
_Z95 = norm.ppf(0.975)

# Sub-stream keys below a channel seed.
_DRAWS = 0
_INNER = 1


class SensingChannel:
    """Maps an artifact value ``theta`` to the captured signal ``zeta``.

    The likelihood model is Gaussian with per-component std ``sigma`` around
    ``mean(theta)``.  Subclasses implement :meth:`sample_batch`; stochastic
    channels set ``deterministic = False`` and estimate the mean by averaging
    ``n_inner`` draws from a fixed seed.
    """

    deterministic = True
    dim = 1

    def __init__(self, sigma):
        self.sigma = float(sigma)

    def mean(self, theta):
        raise NotImplementedError

    def sample_batch(self, theta, n, seed):
        """``n`` draws at ``theta``; row ``i`` uses the same noise for every ``theta``."""
        z = substream(seed, _DRAWS).standard_normal((n, self.dim))
        return self.mean(theta)[None, :] + self.sigma * z

    def sample(self, theta, seed):
        return self.sample_batch(theta, 1, seed)[0]

    def mean_estimate(self, theta, n_inner=256, seed=0):
        if self.deterministic:
            return self.mean(theta)
        return self.sample_batch(theta, n_inner, _inner_seed(seed)).mean(axis=0)


def _inner_seed(seed):
    return int(substream(seed, _INNER).integers(0, 2**63))


class FunctionChannel(SensingChannel):
    """``zeta = f(theta) + sigma * N(0, I)`` for a closed-form mean ``f``."""

    def __init__(self, mean_fn, sigma, dim=1, name="function"):
        super().__init__(sigma)
        self.mean_fn = mean_fn
        self.dim = dim
        self.name = name

    def mean(self, theta):
        return np.atleast_1d(np.asarray(self.mean_fn(float(theta)), dtype=float))

    def __repr__(self):
        return f"FunctionChannel({self.name}, sigma={self.sigma})"


def location_channel(sigma=1.0):
    return FunctionChannel(lambda t: t, sigma, name="location")


def linear_gain_channel(gain=2.0, sigma=1.0):
    return FunctionChannel(lambda t: gain * t, sigma, name="linear")


def quadratic_channel(sigma=1.0):
    return FunctionChannel(lambda t: t * t, sigma, name="quadratic")


def constant_channel(value=0.0, sigma=1.0):
    return FunctionChannel(lambda t: value, sigma, name="constant")


CHANNEL_PRESETS = {
    "location": location_channel,
    "linear": linear_gain_channel,
    "quadratic": quadratic_channel,
    "constant": constant_channel,
}


class ScenarioChannel(SensingChannel):
    """Scene generator, sensor and ASIN stage (and optionally a correlator).

    For ``tumor``, ``theta`` is the target echo amplitude (0 = no target).
    For ``sludge``, ``theta`` is the volume and draw ``i`` uses profile
    ``i mod profile_count``.  Draw ``i`` uses the same scene and sensor seeds
    at every ``theta``.  ``sigma`` is the declared likelihood noise; when
    omitted it is estimated as the pooled per-component std of ``n_sigma``
    draws at ``theta_ref``.
    """

    deterministic = False

    def __init__(self, scenario, cfg, proc, asin, model=None, sigma=None,
                 theta_ref=0.0, n_sigma=512, sigma_seed=0):
        self.scenario = scenario
        self.cfg = cfg
        self.proc = proc
        self.asin = asin
        self.model = model
        if asin.P_asin.shape[1] != proc.P.shape[0] or proc.P.shape[1] != cfg.n:
            raise DimensionError("scenario, sensor and ASIN dimensions do not chain")
        if model is not None and model.k != asin.P_asin.shape[0]:
            raise DimensionError(
                f"model expects {model.k} inputs but the ASIN stage yields {asin.P_asin.shape[0]}")
        self.dim = 1 if model is not None else asin.P_asin.shape[0]
        if sigma is None:
            draws = self.sample_batch(theta_ref, n_sigma, sigma_seed)
            sigma = float(np.sqrt(np.mean(draws.var(axis=0, ddof=1))))
        super().__init__(sigma)

    def _scene(self, theta, i, seed):
        if self.scenario == "tumor":
            return gen_tumor_scene(self.cfg, 1, seed, amplitude=theta)
        return gen_sludge_scene(self.cfg, theta, i % self.cfg.profile_count, seed)

    def sample_batch(self, theta, n, seed):
        scene_seeds = derive_seeds(seed, 1, n)
        sensor_seeds = derive_seeds(seed, 2, n)
        out = np.empty((n, self.dim))
        for i in range(n):
            z = apply_asin(self.asin, self.proc, self._scene(theta, i, int(scene_seeds[i])),
                           int(sensor_seeds[i]))
            out[i] = correlate(self.model, z) if self.model is not None else z
        return out


@dataclass(frozen=True)
class Detector:
    """Correlator plus threshold; ``model=None`` thresholds ``zeta[0]`` directly."""

    threshold: float
    model: object = None

    def scores(self, Z):
        Z = np.atleast_2d(Z)
        if self.model is None:
            return Z[:, 0]
        if Z.shape[1] != self.model.k:
            raise DimensionError(f"detector expects {self.model.k}-vectors, got {Z.shape[1]}")
        return Z @ self.model.w + self.model.b

    def decide(self, Z):
        return self.scores(Z) >= self.threshold


@dataclass(frozen=True)
class PfpEstimate:
    value: float
    ci: tuple[float, float]
    n: int


@dataclass(frozen=True)
class FisherEstimate:
    value: float
    std_error: float
    n_samples: int
    h: float
    theta: float
    scores: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def negative(self):
        return self.value < 0

    @property
    def crlb(self):
        return np.inf if self.value <= 0 else 1.0 / self.value


class ResolutionKind(str, enum.Enum):
    NP = "NP"
    CR = "CR"


@dataclass(frozen=True)
class ResolutionReport:
    kind: ResolutionKind
    delta: float
    epsilon: float
    theta0: float
    delta_theta: np.ndarray = field(repr=False)
    statistic: np.ndarray = field(repr=False)
    ci_low: np.ndarray = field(repr=False)
    ci_high: np.ndarray = field(repr=False)
    saturated: bool
    # P_fp(theta0) for NP reports, I(theta0) for CR reports.
    baseline: float = float("nan")

    @property
    def step(self):
        return float(self.delta_theta[1] - self.delta_theta[0])

    @property
    def crlb(self):
        if self.kind is not ResolutionKind.CR or self.baseline <= 0:
            return float("nan")
        return 1.0 / self.baseline

    def write_csv(self, path):
        header = [
            ("kind", self.kind.value), ("epsilon", fmt(self.epsilon)),
            ("theta0", fmt(self.theta0)), ("delta", fmt(self.delta)),
            ("saturated", str(self.saturated).lower()), ("baseline", fmt(self.baseline)),
        ]
        if self.kind is ResolutionKind.CR:
            header.append(("crlb", fmt(self.crlb)))
        with open(path, "w", newline="") as fh:
            for k, v in header:
                fh.write(f"# {k},{v}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["delta_theta", "statistic", "ci_low", "ci_high"])
            for row in zip(self.delta_theta, self.statistic, self.ci_low, self.ci_high):
                w.writerow([fmt(v) for v in row])

    @classmethod
    def read_csv(cls, path):
        meta, rows = {}, []
        with open(path, newline="") as fh:
            for line in fh:
                if line.startswith("#"):
                    k, v = line[1:].strip().split(",", 1)
                    meta[k] = v
                elif not line.startswith("delta_theta") and line.strip():
                    rows.append([float(v) for v in line.split(",")])
        data = np.array(rows)
        return cls(ResolutionKind(meta["kind"]), float(meta["delta"]), float(meta["epsilon"]),
                   float(meta["theta0"]), data[:, 0], data[:, 1], data[:, 2], data[:, 3],
                   meta["saturated"] == "true", float(meta["baseline"]))


def prefix_delta(grid, statistic, epsilon):
    """Index of the last grid point whose statistic, and all before it, are <= epsilon."""
    ok = np.asarray(statistic) <= epsilon
    if ok.all():
        return len(ok) - 1
    first_bad = int(np.argmin(ok))
    return max(first_bad - 1, 0)


def _sweep_grid(delta_max, n_grid, epsilon):
    if n_grid < 2:
        raise ConfigurationError(f"n_grid must be >= 2, got {n_grid}", key="n_grid")
    if not delta_max > 0:
        raise ConfigurationError(f"delta_max must be > 0, got {delta_max}", key="delta_max")
    if not epsilon >= 0:
        raise ConfigurationError(f"epsilon must be >= 0, got {epsilon}", key="epsilon")
    return np.linspace(0.0, delta_max, n_grid)


def _paired_abs_ci(diffs):
    """95% CI on |mean(diffs)| from paired per-draw differences."""
    m = diffs.mean()
    half = _Z95 * diffs.std(ddof=1) / np.sqrt(diffs.shape[0])
    lo, hi = m - half, m + half
    if lo <= 0 <= hi:
        return 0.0, max(-lo, hi) + 0.0
    return min(abs(lo), abs(hi)), max(abs(lo), abs(hi))


def _alarms(detector, channel, theta, n, seed):
    if n < MIN_MC:
        raise InsufficientDataError(f"need at least {MIN_MC} Monte-Carlo draws, got {n}")
    return np.asarray(detector.decide(channel.sample_batch(theta, n, seed)), dtype=bool)


def estimate_pfp(detector, channel, theta, n, seed):
    """Fraction of ``n`` channel draws at ``theta`` that the detector declares present."""
    alarms = _alarms(detector, channel, theta, n, seed)
    k = int(alarms.sum())
    return PfpEstimate(k / n, wilson_interval(k, n), n)


def delta_np(detector, channel, theta0, epsilon, delta_max, n_grid, n_mc, seed):
    grid = _sweep_grid(delta_max, n_grid, epsilon)
    base = _alarms(detector, channel, theta0, n_mc, seed).astype(float)
    stat, lo, hi = [], [], []
    for g in grid:
        diffs = _alarms(detector, channel, theta0 + g, n_mc, seed).astype(float) - base
        stat.append(abs(diffs.mean()))
        ci = _paired_abs_ci(diffs)
        lo.append(ci[0])
        hi.append(ci[1])
    idx = prefix_delta(grid, stat, epsilon)
    return ResolutionReport(ResolutionKind.NP, float(grid[idx]), float(epsilon), float(theta0),
                            grid, np.array(stat), np.array(lo), np.array(hi),
                            idx == len(grid) - 1, float(base.mean()))


def _gaussian_loglik(Z, mu, sigma):
    if not sigma > 0:
        raise DegenerateLikelihoodError(f"likelihood needs sigma > 0, got {sigma}")
    r = Z - mu[None, :]
    return (-0.5 * np.log(2 * np.pi * sigma**2) * Z.shape[1]
            - np.sum(r * r, axis=1) / (2 * sigma**2))


def log_likelihood(channel, zeta, theta, n_inner=256, seed=0):
    """Gaussian log-likelihood of ``zeta`` at ``theta`` under the channel's noise model."""
    zeta = check_vector(zeta, "zeta", length=channel.dim)
    mu = channel.mean_estimate(theta, n_inner, seed)
    return float(_gaussian_loglik(zeta[None, :], mu, channel.sigma)[0])


def default_step(theta):
    return 1e-3 * max(1.0, abs(theta))


def _fd_scores(channel, Z, theta, h, n_inner, seed):
    if not h > 0:
        raise NumericalStepError(f"finite-difference step must be > 0, got {h}")
    if h < 64 * np.finfo(float).eps * max(1.0, abs(theta)):
        raise NumericalStepError(
            f"step h={h:g} is below working precision at theta={theta:g}; use a larger h")
    sigma = channel.sigma
    lp = _gaussian_loglik(Z, channel.mean_estimate(theta + h, n_inner, seed), sigma)
    lm = _gaussian_loglik(Z, channel.mean_estimate(theta - h, n_inner, seed), sigma)
    scores = (lp - lm) / (2 * h)
    if not np.all(np.isfinite(scores)):
        raise NumericalStepError(
            f"non-finite likelihood score at theta={theta:g}, h={h:g}; use a larger h")
    return scores


def fisher_information(channel, theta, n_samples, h=None, seed=0, n_inner=256, draws=None):
    """Monte-Carlo Fisher information ``E[score^2]`` at ``theta``.

    ``draws`` lets callers supply the noise-sharing ``zeta`` sample; by
    default ``n_samples`` draws are taken from ``channel(theta, seed)``.
    """
    if n_samples < MIN_MC:
        raise InsufficientDataError(f"need at least {MIN_MC} samples, got {n_samples}")
    h = default_step(theta) if h is None else float(h)
    if not channel.sigma > 0:
        raise DegenerateLikelihoodError("Fisher information needs sigma > 0")
    Z = channel.sample_batch(theta, n_samples, seed) if draws is None else draws
    sq = _fd_scores(channel, Z, theta, h, n_inner, seed) ** 2
    return FisherEstimate(float(sq.mean()), float(sq.std(ddof=1) / np.sqrt(n_samples)),
                          int(n_samples), h, float(theta), sq)


def delta_cr(channel, theta0, epsilon, delta_max, n_grid, n_samples, h=None, seed=0, n_inner=256):
    grid = _sweep_grid(delta_max, n_grid, epsilon)
    h = default_step(theta0) if h is None else float(h)
    base = fisher_information(channel, theta0, n_samples, h, seed, n_inner)
    stat, lo, hi = [], [], []
    for g in grid:
        est = fisher_information(channel, theta0 + g, n_samples, h, seed, n_inner)
        diffs = est.scores - base.scores
        stat.append(abs(diffs.mean()))
        ci = _paired_abs_ci(diffs)
        lo.append(ci[0])
        hi.append(ci[1])
    idx = prefix_delta(grid, stat, epsilon)
    return ResolutionReport(ResolutionKind.CR, float(grid[idx]), float(epsilon), float(theta0),
                            grid, np.array(stat), np.array(lo), np.array(hi),
                            idx == len(grid) - 1, base.value)
