"""Input validation helpers shared by the estimators and simulation code."""

import numbers

import numpy as np


class ConfigError(ValueError):
    """Raised when a configuration value violates its declared range.

    ``path`` is the dotted key into the scenario config (``relay.mu``) when
    known, so CLI diagnostics can point at the offending entry.
    """

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NoDataError(RuntimeError):
    """Raised when an estimate is requested without enough data."""


class NotPhysicalError(ValueError):
    """Raised when a matrix fails the density-matrix invariants."""


def check_scalar(x, name, *, min_val=None, max_val=None, include_min=True,
                 include_max=True, kind=numbers.Real):
    """Validate a scalar and return it unchanged.

    Mirrors :func:`sklearn.utils.check_scalar` but raises :class:`ConfigError`
    carrying the parameter name as the path.
    """
    if isinstance(x, bool) or not isinstance(x, kind):
        raise ConfigError(f"expected {kind.__name__}, got {type(x).__name__}", name)
    if not np.isfinite(x):
        raise ConfigError("must be finite", name)
    if min_val is not None:
        if x < min_val or (not include_min and x == min_val):
            op = ">=" if include_min else ">"
            raise ConfigError(f"{x} violates {op} {min_val}", name)
    if max_val is not None:
        if x > max_val or (not include_max and x == max_val):
            op = "<=" if include_max else "<"
            raise ConfigError(f"{x} violates {op} {max_val}", name)
    return x


def check_probability(p, name):
    return check_scalar(p, name, min_val=0.0, max_val=1.0)


def check_random_state(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def check_density_matrix(m, *, atol=1e-10):
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise NotPhysicalError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.allclose(m, m.conj().T, atol=atol):
        raise NotPhysicalError("matrix is not Hermitian")
    if abs(np.trace(m).real - 1.0) > atol:
        raise NotPhysicalError(f"trace {np.trace(m).real!r} != 1")
    if np.linalg.eigvalsh(m).min() < -atol:
        raise NotPhysicalError("matrix has a negative eigenvalue")
    return m


def check_sorted_times(times, name="stream"):
    times = np.asarray(times)
    if times.size > 1 and np.any(np.diff(times) < 0):
        raise ValueError(f"{name} is not sorted by time")
    return times
