"""Per-outcome state tomography of the teleported photon."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..qstate import (BellState, DensityMatrix, ProjectionCounts, expected_teleported_state,
                      fidelity, reconstruct_density)

# Central-node setting -> measured equatorial basis.
BASIS_OF_ALPHA = {0.0: "X", np.pi / 2: "Y"}


class PartialDataError(ValueError):
    """Events from one of the required interferometer settings are missing."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__(f"missing measurement bases: {', '.join(self.missing)}")


@dataclass(frozen=True)
class TomographyResult:
    outcome: BellState
    counts: ProjectionCounts
    rho: DensityMatrix
    stokes: tuple
    fidelity: float
    n_events: int

    def as_dict(self):
        return {
            "outcome": self.outcome.value,
            "n_events": self.n_events,
            "fidelity": float(self.fidelity),
            "stokes": [float(s) for s in self.stokes],
            "counts": {k: float(getattr(self.counts, k))
                       for k in ("n0", "n1", "n_plus", "n_minus", "n_plus_i", "n_minus_i")},
            "rho_real": np.real(self.rho.m).tolist(),
            "rho_imag": np.imag(self.rho.m).tolist(),
        }


def _basis(alpha):
    a = float(np.mod(alpha, 2 * np.pi))
    for ref, name in BASIS_OF_ALPHA.items():
        if abs(a - ref) < 1e-6:
            return name
    return None


def raw_counts(events):
    """``{outcome: {basis: {(port, bin): count}}}`` from teleportation events."""
    out = {}
    for ev in events:
        basis = _basis(ev.alpha_meas)
        if basis is None:
            continue
        cell = out.setdefault(ev.bsm, {}).setdefault(basis, {})
        cell[ev.central_click] = cell.get(ev.central_click, 0) + 1
    return out


def pool_counts(by_basis):
    """Combine both interferometer settings into one :class:`ProjectionCounts`.

    Early/late counts (bins 0 and 2) add up over settings.  The middle-bin
    counts of each setting are rescaled so that ``n_plus + n_minus`` (and
    the ``i`` pair) equals the pooled ``n0 + n1``.
    """
    missing = [b for b in ("X", "Y") if not by_basis.get(b)]
    if missing:
        raise PartialDataError(missing)

    def get(basis, port, b):
        return float(by_basis[basis].get((port, b), 0))

    n0 = sum(get(s, p, 0) for s in ("X", "Y") for p in ("B1", "B2"))
    n1 = sum(get(s, p, 2) for s in ("X", "Y") for p in ("B1", "B2"))
    total = n0 + n1
    mids = {}
    for s in ("X", "Y"):
        plus, minus = get(s, "B1", 1), get(s, "B2", 1)
        scale = total / (plus + minus) if plus + minus > 0 else 0.0
        mids[s] = (plus * scale, minus * scale)
    return ProjectionCounts(n0, n1, mids["X"][0], mids["X"][1], mids["Y"][0], mids["Y"][1])


def teleport_tomography(events, input_state):
    """Density matrix and fidelity for each announced Bell outcome.

    Events must come from both central settings (phase 0 and pi/2).
    Returns ``{BellState: TomographyResult}`` for the outcomes present.
    """
    counts = raw_counts(events)
    seen = {b for per in counts.values() for b in per}
    missing = [b for b in ("X", "Y") if b not in seen]
    if missing:
        raise PartialDataError(missing)
    results = {}
    for outcome in (BellState.PSI_PLUS, BellState.PSI_MINUS):
        by_basis = counts.get(outcome)
        if not by_basis:
            continue
        pc = pool_counts(by_basis)
        est = StokesTomography().fit(pc)
        aim = expected_teleported_state(input_state, outcome)
        n = sum(sum(c.values()) for c in by_basis.values())
        results[outcome] = TomographyResult(outcome, pc, est.rho_, tuple(est.stokes_),
                                            est.score(aim), n)
    return results


class StokesTomography(BaseEstimator):
    """Linear-inversion tomography as an estimator.

    ``fit`` takes a :class:`ProjectionCounts` (or the six counts as a
    sequence ``n0, n1, n+, n-, n+i, n-i``).  ``raw_`` keeps the unprojected
    estimate; ``score`` returns the fidelity of ``rho_`` to a target state.
    """

    def fit(self, counts, y=None):
        if not isinstance(counts, ProjectionCounts):
            vals = np.asarray(counts, dtype=float).ravel()
            if vals.size != 6:
                raise ValueError("expected six projection counts")
            counts = ProjectionCounts(*vals)
        rho, stokes, raw = reconstruct_density(counts)
        self.counts_ = counts
        self.stokes_ = stokes.as_array()
        self.raw_ = raw
        self.rho_ = rho
        return self

    def transform(self, counts=None):
        check_is_fitted(self, "rho_")
        return self.rho_.m

    def score(self, target, y=None):
        check_is_fitted(self, "rho_")
        return fidelity(target, self.rho_)
