import numpy as np

from .exceptions import DimensionError, DomainError


def check_vector(x, name="x", length=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {x.shape}")
    if length is not None and x.shape[0] != length:
        raise DimensionError(f"{name} has length {x.shape[0]}, expected {length}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} contains non-finite entries")
    return x


def check_matrix(a, name="matrix", min_rows=1, min_cols=1):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < min_rows or a.shape[1] < min_cols:
        raise DimensionError(f"{name} has shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains non-finite entries")
    return a


def check_binary(y, name="y"):
    y = np.asarray(y)
    if y.ndim != 1:
        raise DimensionError(f"{name} must be 1-D")
    if not np.all((y == 0) | (y == 1)):
        raise DomainError(f"{name} must contain only 0/1 labels")
    return y.astype(int)


def check_probability(p, name="p", open_interval=True):
    p = float(p)
    ok = 0.0 < p < 1.0 if open_interval else 0.0 <= p <= 1.0
    if not ok:
        raise DomainError(f"{name} must lie in {'(0, 1)' if open_interval else '[0, 1]'}, got {p}")
    return p
