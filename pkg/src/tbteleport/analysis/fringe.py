"""Sinusoidal fringe fitting with a fixed, commanded period."""

from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


class FitError(RuntimeError):
    """A fit did not converge or had too little data."""


@dataclass(frozen=True)
class FringeFit:
    amplitude: float
    offset: float
    phase: float
    period: float
    visibility: float
    amplitude_stderr: float
    offset_stderr: float
    phase_stderr: float

    @property
    def maximum(self):
        return self.offset + self.amplitude

    @property
    def minimum(self):
        return self.offset - self.amplitude

    def as_dict(self):
        return asdict(self)


def _model(phi, amp, phase, offset, period):
    return amp * np.cos(2 * np.pi * (phi - phase) / period) + offset


def fit_sinusoid(phis, counts, period=2 * np.pi, max_iter=100, tol=1e-10):
    """Poisson-weighted least-squares fit of ``A cos(phi - phi0) + C``.

    The period is held fixed, which makes the model linear in
    ``(a cos, b sin, C)``.  Weights start from the observed counts and are
    refined from the fitted curve (iteratively reweighted least squares)
    until the parameters settle.  Needs at least five points covering one
    period.
    """
    phis = np.asarray(phis, dtype=float)
    y = np.asarray(counts, dtype=float)
    if phis.shape != y.shape or phis.ndim != 1:
        raise ValueError("phis and counts must be equal-length 1-D arrays")
    if phis.size < 5:
        raise FitError(f"need >= 5 points, got {phis.size}")
    w = np.mod(2 * np.pi * phis / period, 2 * np.pi)
    gaps = np.diff(np.sort(np.concatenate([w, w[:1] + 2 * np.pi])))
    if gaps.max() >= np.pi:
        raise FitError("points must span at least one period")
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise ValueError("counts must be finite and non-negative")
    design = np.column_stack([np.cos(w), np.sin(w), np.ones_like(w)])
    var = np.maximum(y, 1.0)
    sol = None
    for _ in range(max_iter):
        wd = design / np.sqrt(var)[:, None]
        normal = wd.T @ wd
        if np.linalg.cond(normal) > 1e12:
            raise FitError("phase points do not constrain the fit")
        new = np.linalg.solve(normal, wd.T @ (y / np.sqrt(var)))
        if sol is not None and np.allclose(new, sol, rtol=tol, atol=tol * max(1.0, y.max())):
            sol = new
            break
        sol = new
        var = np.maximum(design @ sol, 1.0)
    else:
        raise FitError(f"fringe fit did not converge in {max_iter} iterations")
    cov = np.linalg.inv(normal)
    a, b, c = sol
    amp = float(np.hypot(a, b))
    phase = float(np.mod(np.arctan2(b, a), 2 * np.pi)) * period / (2 * np.pi)
    if amp > 0:
        ja = np.array([a, b]) / amp
        jp = np.array([-b, a]) / amp ** 2
        amp_err = float(np.sqrt(ja @ cov[:2, :2] @ ja))
        ph_err = float(np.sqrt(jp @ cov[:2, :2] @ jp)) * period / (2 * np.pi)
    else:
        amp_err = float(np.sqrt(0.5 * (cov[0, 0] + cov[1, 1])))
        ph_err = float("inf")
    vis = float(np.clip(amp / c, 0.0, 1.0)) if c > 0 else 0.0
    return FringeFit(amp, float(c), phase, float(period), vis, amp_err,
                     float(np.sqrt(cov[2, 2])), ph_err)


class FringeFitter(RegressorMixin, BaseEstimator):
    """Estimator wrapper: ``fit(phis, counts)`` then ``predict(phis)``."""

    def __init__(self, period=2 * np.pi, max_iter=100):
        self.period = period
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(-1, 1), y, y_numeric=True)
        self.fit_ = fit_sinusoid(X[:, 0], y, self.period, self.max_iter)
        self.amplitude_ = self.fit_.amplitude
        self.offset_ = self.fit_.offset
        self.phase_ = self.fit_.phase
        self.visibility_ = self.fit_.visibility
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        X = check_array(np.asarray(X, dtype=float).reshape(-1, 1))
        return _model(X[:, 0], self.amplitude_, self.phase_, self.offset_, self.period)


def visibility(counts):
    """Raw ``(max - min) / (max + min)`` of a count series."""
    c = np.asarray(counts, dtype=float)
    tot = c.max() + c.min()
    return float((c.max() - c.min()) / tot) if tot > 0 else 0.0
