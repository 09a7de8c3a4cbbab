"""Sensor stage: generic measurement ``s = P e`` and the application-specific
stage ``s' = P_asin s``.

Measurements are plain 1-D float arrays.  Sensor noise is added to ``s``
before the application-specific matrix is applied.
"""
import enum
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._rng import substream
from ._validation import check_matrix, check_vector
from .exceptions import DegenerateDataError, DimensionError, DomainError, MethodMismatchError
from .io import read_matrix, write_matrix


class AsinMethod(str, enum.Enum):
    IDENTITY = "identity"
    RANDOM_PROJECTION = "random_projection"
    FISHER_DISCRIMINANT = "fisher_discriminant"
    ENERGY_BANDS = "energy_bands"


def _frozen(a):
    # C order: BLAS summation order depends on layout, and loaded matrices are C
    a = np.array(a, dtype=float, order="C")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class MeasurementProcess:
    P: np.ndarray = field(repr=False)
    noise_std: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "P", _frozen(check_matrix(self.P, "P")))
        if not np.isfinite(self.noise_std) or self.noise_std < 0:
            raise DomainError(f"noise_std must be finite and >= 0, got {self.noise_std}")

    @property
    def shape(self):
        return self.P.shape


@dataclass(frozen=True)
class AsinMatrix:
    P_asin: np.ndarray = field(repr=False)
    design_method: AsinMethod = AsinMethod.IDENTITY
    design_seed: int = 0

    def __post_init__(self):
        a = check_matrix(self.P_asin, "P_asin")
        if a.shape[0] > a.shape[1]:
            raise DimensionError(f"P_asin must not inflate dimension, got shape {a.shape}")
        object.__setattr__(self, "P_asin", _frozen(a))
        object.__setattr__(self, "design_method", AsinMethod(self.design_method))

    @property
    def shape(self):
        return self.P_asin.shape

    def save(self, path):
        write_matrix(path, self.P_asin)

    @classmethod
    def load(cls, path, design_method=AsinMethod.IDENTITY, design_seed=0):
        return cls(read_matrix(path), design_method, design_seed)


def identity_process(n, noise_std=0.0):
    return MeasurementProcess(np.eye(n), noise_std)


def crude_process(n, m, width=1.0, noise_std=0.0):
    """Low-resolution sensor: ``m`` Gaussian-blurred range cells over ``n`` bins.

    Row ``i`` is a Gaussian kernel of std ``width`` bins centred on the middle
    of the ``i``-th of ``m`` equal cells, normalised to unit sum.
    """
    if not 1 <= m <= n:
        raise DimensionError(f"need 1 <= m <= n, got m={m}, n={n}")
    if width <= 0:
        raise DomainError("width must be > 0")
    centres = (np.arange(m) + 0.5) * n / m - 0.5
    P = np.exp(-0.5 * ((np.arange(n)[None, :] - centres[:, None]) / width) ** 2)
    P /= P.sum(axis=1, keepdims=True)
    return MeasurementProcess(P, noise_std)


def apply_measurement(proc, scene, seed):
    """``s = P e + noise`` with noise drawn from ``seed``; exact when noise_std is 0."""
    e = getattr(scene, "e", scene)
    e = check_vector(e, "e")
    if e.shape[0] != proc.P.shape[1]:
        raise DimensionError(
            f"P has {proc.P.shape[1]} columns but the scene has dimension {e.shape[0]}")
    s = proc.P @ e
    if proc.noise_std > 0:
        s = s + proc.noise_std * substream(seed).standard_normal(s.shape[0])
    return s


def apply_asin(asin, proc, scene, seed):
    """``s' = P_asin (P e + noise)``."""
    if asin.P_asin.shape[1] != proc.P.shape[0]:
        raise DimensionError(
            f"P_asin has {asin.P_asin.shape[1]} columns but P has {proc.P.shape[0]} rows")
    return asin.P_asin @ apply_measurement(proc, scene, seed)


def measure_batch(proc, E, seeds, asin=None):
    """Measure every row of ``E`` with its own noise seed."""
    E = np.atleast_2d(E)
    if len(seeds) != E.shape[0]:
        raise DimensionError("need one seed per scene")
    if asin is None:
        return np.stack([apply_measurement(proc, e, s) for e, s in zip(E, seeds)])
    return np.stack([apply_asin(asin, proc, e, s) for e, s in zip(E, seeds)])


def _orthonormal_completion(first, k, rng):
    m = first.shape[0]
    cols = np.column_stack([first, rng.standard_normal((m, k - 1))])
    q, r = np.linalg.qr(cols)
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    return q.T


def fisher_direction(S, y):
    """Unit vector along ``(Sigma_pooled + lam I)^-1 (mu1 - mu0)``.

    ``lam = 1e-6 * trace(Sigma_pooled) / m`` keeps the solve well posed when
    the pooled covariance is rank deficient.
    """
    y = np.asarray(y, dtype=float)
    if not np.all((y == 0) | (y == 1)):
        raise MethodMismatchError("fisher_discriminant needs binary (0/1) truth values")
    if (y == 1).sum() == 0 or (y == 0).sum() == 0:
        raise DegenerateDataError("fisher_discriminant needs both classes in training data")
    S0, S1 = S[y == 0], S[y == 1]
    mu0, mu1 = S0.mean(axis=0), S1.mean(axis=0)
    d0, d1 = S0 - mu0, S1 - mu1
    dof = max(S.shape[0] - 2, 1)
    sigma = (d0.T @ d0 + d1.T @ d1) / dof
    m = S.shape[1]
    lam = max(1e-6 * np.trace(sigma) / m, 1e-12)
    w = np.linalg.solve(sigma + lam * np.eye(m), mu1 - mu0)
    norm = np.linalg.norm(w)
    if norm == 0:
        raise DegenerateDataError("class means coincide; no discriminant direction")
    return w / norm


def design_asin_matrix(method, S, y, k, seed=0):
    """Build a ``k x m`` application-specific matrix from training measurements.

    ``S`` holds one measurement per row; ``y`` the matching truth values
    (only used by ``fisher_discriminant``).
    """
    method = AsinMethod(method)
    S = np.atleast_2d(np.asarray(S, dtype=float))
    m = S.shape[1]
    k = int(k)
    if k < 1 or k > m:
        raise DimensionError(f"need 1 <= k <= m, got k={k}, m={m}")

    if method is AsinMethod.IDENTITY:
        P = np.eye(k, m)
    elif method is AsinMethod.RANDOM_PROJECTION:
        P = substream(seed).standard_normal((k, m)) / np.sqrt(m)
    elif method is AsinMethod.ENERGY_BANDS:
        P = np.zeros((k, m))
        for i, band in enumerate(np.array_split(np.arange(m), k)):
            P[i, band] = 1.0 / band.size
    else:
        if S.shape[0] == 0:
            raise DegenerateDataError("fisher_discriminant needs training data")
        if y is None or len(y) != S.shape[0]:
            raise DimensionError("need one truth value per training measurement")
        w = fisher_direction(check_matrix(S, "S"), y)
        P = w[None, :] if k == 1 else _orthonormal_completion(w, k, substream(seed))
    return AsinMatrix(P, method, int(seed))


class AsinProjector(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`design_asin_matrix`.

    ``fit`` designs the matrix from training measurements, ``transform``
    applies it row-wise.
    """

    def __init__(self, method="fisher_discriminant", n_components=1, random_state=0):
        self.method = method
        self.n_components = n_components
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X)
        self.asin_matrix_ = design_asin_matrix(
            self.method, X, y, self.n_components, self.random_state)
        self.components_ = self.asin_matrix_.P_asin
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(
                f"X has {X.shape[1]} features, projector was fitted on {self.n_features_in_}")
        return X @ self.components_.T
