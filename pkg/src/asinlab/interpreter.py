"""Interpreter stage: turns correlator scores into a decision level.

Binary decisions compare the score with a Neyman-Pearson threshold calibrated
on artifact-absent scores; the reported presence probability is
``sigmoid(score - threshold)`` and ties decide *present*.  Scalar decisions
apply an affine calibration ``a * score + c``.
"""
import csv
import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import norm
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_probability, check_vector
from .exceptions import ConfigurationError, DegenerateDataError, DomainError, InsufficientDataError
from .io import fmt

MIN_CALIBRATION = 20
_Z95 = norm.ppf(0.975)


class DecisionKind(str, enum.Enum):
    BINARY = "binary"
    SCALAR = "scalar"


@dataclass(frozen=True)
class DecisionLevel:
    kind: DecisionKind
    present: bool | None = None
    p_present: float | None = None
    estimate: float | None = None

    def __post_init__(self):
        if self.kind is DecisionKind.BINARY:
            if self.present is None or self.p_present is None or self.estimate is not None:
                raise DomainError("binary decisions carry present and p_present only")
            if not 0.0 <= self.p_present <= 1.0:
                raise DomainError(f"p_present must lie in [0, 1], got {self.p_present}")
        elif self.present is not None or self.p_present is not None or self.estimate is None:
            raise DomainError("scalar decisions carry estimate only")


def wilson_interval(successes, n, z=_Z95):
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise InsufficientDataError("Wilson interval needs n >= 1")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class ThresholdCal:
    """Neyman-Pearson operating point.

    ``achieved_pfp`` and its interval are ``None`` for calibrations loaded
    from file, which stores only the threshold, target and sample count.
    """

    threshold: float
    target_pfp: float
    n_calibration: int
    achieved_pfp: float | None = None
    achieved_ci: tuple[float, float] | None = None

    def __post_init__(self):
        if self.n_calibration < 1:
            raise DomainError("n_calibration must be >= 1")
        if self.achieved_pfp is not None and not 0.0 <= self.achieved_pfp <= 1.0:
            raise DomainError("achieved_pfp must lie in [0, 1]")

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(f"{fmt(self.threshold)}\n{fmt(self.target_pfp)}\n{self.n_calibration}\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        try:
            return cls(float(lines[0]), float(lines[1]), int(lines[2]))
        except (ValueError, IndexError) as exc:
            raise ConfigurationError(f"malformed calibration file {path}: {exc}") from exc


def midpoint_quantile(values, q):
    """Empirical quantile with midpoint interpolation.

    With ``x`` sorted and ``p = (n - 1) q``, returns
    ``(x[floor(p)] + x[ceil(p)]) / 2`` (equal to ``x[p]`` for integral ``p``).
    """
    x = np.sort(np.asarray(values, dtype=float))
    p = (x.shape[0] - 1) * q
    lo, hi = int(np.floor(p)), int(np.ceil(p))
    return 0.5 * (x[lo] + x[hi])


def calibrate_threshold(null_scores, target_pfp):
    """Threshold at the ``1 - target_pfp`` quantile of artifact-absent scores."""
    target_pfp = check_probability(target_pfp, "target_pfp")
    scores = check_vector(null_scores, "null_scores")
    n = scores.shape[0]
    if n < MIN_CALIBRATION:
        raise InsufficientDataError(
            f"threshold calibration needs >= {MIN_CALIBRATION} null scores, got {n}")
    threshold = midpoint_quantile(scores, 1.0 - target_pfp)
    alarms = int(np.sum(scores >= threshold))
    return ThresholdCal(threshold, target_pfp, n, alarms / n, wilson_interval(alarms, n))


def interpret_binary(score, cal):
    score = float(score)
    if not np.isfinite(score):
        raise DomainError("score must be finite")
    return DecisionLevel(DecisionKind.BINARY, present=bool(score >= cal.threshold),
                         p_present=float(expit(score - cal.threshold)))


def interpret_scalar(score, a, c):
    score = float(score)
    if not np.isfinite(score) or not np.isfinite(a) or not np.isfinite(c):
        raise DomainError("scalar interpretation needs finite inputs")
    return DecisionLevel(DecisionKind.SCALAR, estimate=a * score + c)


def fit_affine(scores, truths):
    """Least-squares ``(a, c)`` with ``truth ~ a * score + c``."""
    s = check_vector(scores, "scores")
    t = check_vector(truths, "truths", length=s.shape[0])
    if s.shape[0] < 2 or np.ptp(s) == 0:
        raise DegenerateDataError("affine calibration needs >= 2 distinct scores")
    A = np.column_stack([s, np.ones_like(s)])
    (a, c), *_ = np.linalg.lstsq(A, t, rcond=None)
    return float(a), float(c)


def write_decisions_csv(path, scores, cal):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["score", "present", "p_present"])
        for s in scores:
            d = interpret_binary(s, cal)
            w.writerow([fmt(s), int(d.present), fmt(d.p_present)])


class NeymanPearsonInterpreter(BaseEstimator):
    """Binary interpreter calibrated to a false-present rate.

    ``fit`` takes correlator scores; when labels are given only the
    ``y == 0`` scores are used for calibration.
    """

    def __init__(self, target_pfp=0.05):
        self.target_pfp = target_pfp

    def fit(self, scores, y=None):
        scores = np.ravel(np.asarray(scores, dtype=float))
        if y is not None:
            scores = scores[np.asarray(y) == 0]
        self.calibration_ = calibrate_threshold(scores, self.target_pfp)
        self.threshold_ = self.calibration_.threshold
        self.classes_ = np.array([0, 1])
        return self

    def predict(self, scores):
        check_is_fitted(self, "threshold_")
        return (np.ravel(np.asarray(scores, dtype=float)) >= self.threshold_).astype(int)

    def predict_proba(self, scores):
        check_is_fitted(self, "threshold_")
        p1 = expit(np.ravel(np.asarray(scores, dtype=float)) - self.threshold_)
        return np.column_stack([1.0 - p1, p1])


class ScalarCalibrator(BaseEstimator):
    """Affine map from correlator score to the artifact value."""

    def fit(self, scores, y):
        self.slope_, self.offset_ = fit_affine(np.ravel(scores), y)
        return self

    def predict(self, scores):
        check_is_fitted(self, "slope_")
        return self.slope_ * np.ravel(np.asarray(scores, dtype=float)) + self.offset_
