"""Plain-text formats shared by the modules.

Floats are written in Python's shortest round-trip form (``repr``), which
carries up to 17 significant digits and reloads to the identical double.
"""
import numpy as np

from .exceptions import ConfigurationError


def fmt(x):
    return repr(float(x))


def write_matrix(path, a):
    """``rows cols`` header, then one space-separated row per line."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w") as fh:
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for row in a:
            fh.write(" ".join(fmt(v) for v in row) + "\n")


def read_matrix(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    try:
        rows, cols = (int(t) for t in lines[0].split())
        a = np.array([[float(t) for t in ln.split()] for ln in lines[1:]], dtype=float)
    except (ValueError, IndexError) as exc:
        raise ConfigurationError(f"malformed matrix file {path}: {exc}") from exc
    if a.shape != (rows, cols):
        raise ConfigurationError(
            f"matrix file {path} declares {rows}x{cols} but holds {a.shape}")
    return a
