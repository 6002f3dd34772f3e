"""Two-photon interference scan at the relay analyzer."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..protocol.model import LinkModel, evaluate
from ..protocol.simulate import PULSES_PER_S
from .fringe import FitError

PLATEAU_SIGMAS = 5.0


def _dip(x, plateau, depth, center, width):
    return plateau * (1.0 - depth * np.exp(-0.5 * ((x - center) / width) ** 2))


class HomDipFitter(RegressorMixin, BaseEstimator):
    """Gaussian dip ``P (1 - V exp(-(x - x0)^2 / 2 w^2))``."""

    def __init__(self, width_guess=10.0, max_iter=5000):
        self.width_guess = width_guess
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(-1, 1), y, y_numeric=True)
        x = X[:, 0]
        plateau0 = float(np.max(y)) if np.max(y) > 0 else 1.0
        depth0 = float(np.clip(1.0 - np.min(y) / plateau0, 0.0, 1.0))
        p0 = [plateau0, depth0, float(x[np.argmin(y)]), self.width_guess]
        try:
            popt, pcov = curve_fit(_dip, x, y, p0=p0, maxfev=self.max_iter,
                                   bounds=([0, -1, x.min(), 1e-3], [np.inf, 1, x.max(), np.ptp(x)]))
        except (RuntimeError, ValueError) as exc:
            raise FitError(f"dip fit did not converge: {exc}") from None
        self.plateau_, self.visibility_, self.center_, self.width_ = (float(v) for v in popt)
        self.stderr_ = np.sqrt(np.clip(np.diag(pcov), 0.0, None))
        return self

    def predict(self, X):
        check_is_fitted(self, "plateau_")
        X = check_array(np.asarray(X, dtype=float).reshape(-1, 1))
        return _dip(X[:, 0], self.plateau_, self.visibility_, self.center_, self.width_)


@dataclass
class HomScan:
    delays_ps: np.ndarray
    counts: np.ndarray
    normalized: np.ndarray
    plateau: float
    visibility: float
    fit_visibility: float
    fit_width_ps: float
    expected: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def as_dict(self):
        return {
            "delays_ps": [float(d) for d in self.delays_ps],
            "counts": [float(c) for c in self.counts],
            "normalized": [float(c) for c in self.normalized],
            "plateau": float(self.plateau),
            "visibility": float(self.visibility),
            "fit_visibility": float(self.fit_visibility),
            "fit_width_ps": float(self.fit_width_ps),
        }


def hom_scan(cfg, delays, *, duration_s=None, rng=None, heralded=False, model=None,
             user_state=(0.5, 0.0)):
    """Coincidences of merged ports ``C1+C2`` vs ``C3+C4`` in the same bin.

    With ``duration_s`` the counts per delay are Poisson draws for that
    integration time; otherwise expected values are returned.  Points with
    ``|delay|`` beyond five wavepacket widths form the normalization plateau.
    """
    model = model or LinkModel(cfg)
    delays = np.asarray(delays, dtype=float)
    if delays.ndim != 1 or delays.size == 0:
        raise ValueError("delays must be a non-empty 1-D list")
    coef = model.hom_coefficients(user_state, heralded=heralded).sum(axis=0)
    per_pulse = np.array([float(evaluate(coef, model.overlap(d))) for d in delays])
    pulses = PULSES_PER_S * (1.0 if duration_s is None else float(duration_s))
    expected = per_pulse * pulses
    if duration_s is not None:
        if rng is None:
            raise ValueError("sampling counts needs an rng")
        counts = rng.poisson(expected).astype(float)
    else:
        counts = expected.copy()
    sigma = max(model.user_wavepacket.sigma, model.relay_wavepacket.sigma)
    far = np.abs(delays) > PLATEAU_SIGMAS * sigma
    if not np.any(far):
        raise ValueError(f"no delay beyond {PLATEAU_SIGMAS:g} wavepacket widths for the plateau")
    plateau = float(np.mean(counts[far]))
    if plateau <= 0:
        raise ValueError("plateau has zero coincidences; cannot normalize")
    normalized = counts / plateau
    vis = float(1.0 - normalized.min())
    try:
        fitter = HomDipFitter(width_guess=2 * sigma).fit(delays, normalized)
        fit_vis, fit_w = fitter.visibility_, fitter.width_
    except FitError:
        fit_vis = fit_w = float("nan")
    return HomScan(delays, counts, normalized, plateau, vis, fit_vis, fit_w, expected)
