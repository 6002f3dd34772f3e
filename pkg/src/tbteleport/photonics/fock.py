"""Creation-operator polynomials for few-photon linear optics.

A state is a polynomial in creation operators acting on vacuum, stored as
``{monomial: coefficient}`` where a monomial is a sorted tuple of mode
indices (a multiset).  A passive linear network substitutes every input
operator by a linear combination of output operators; loss is a network
with extra environment outputs.  Photon numbers here stay below ~8, so
plain dict expansion is fast enough.
"""

from collections import defaultdict
from math import factorial

import numpy as np


class ModeRegistry:
    """Bidirectional map between hashable mode labels and integer indices."""

    def __init__(self):
        self._index = {}
        self.labels = []

    def __call__(self, label):
        idx = self._index.get(label)
        if idx is None:
            idx = len(self.labels)
            self._index[label] = idx
            self.labels.append(label)
        return idx

    def __len__(self):
        return len(self.labels)


def _mul_linear(poly, form):
    out = defaultdict(complex)
    for mono, c in poly.items():
        for mode, f in form:
            key = tuple(sorted(mono + (mode,)))
            out[key] += c * f
    return out


def product(forms):
    """Polynomial ``prod_k (sum_j f_kj a_j^dag)``."""
    poly = {(): 1.0 + 0j}
    for form in forms:
        poly = _mul_linear(poly, form)
    return dict(poly)


def multiply(p, q):
    out = defaultdict(complex)
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            out[tuple(sorted(m1 + m2))] += c1 * c2
    return dict(out)


def add(*terms):
    """Sum of ``(weight, poly)`` pairs."""
    out = defaultdict(complex)
    for w, p in terms:
        for m, c in p.items():
            out[m] += w * c
    return dict(out)


def _occupation_factor(mono):
    f = 1
    prev = None
    run = 0
    for m in mono:
        if m == prev:
            run += 1
        else:
            f *= factorial(run)
            prev, run = m, 1
    return f * factorial(run)


def norm_squared(poly):
    return float(sum(abs(c) ** 2 * _occupation_factor(m) for m, c in poly.items()))


def normalized(poly):
    n = np.sqrt(norm_squared(poly))
    if n == 0:
        raise ValueError("zero state")
    return {m: c / n for m, c in poly.items()}


def apply_network(poly, network):
    """Substitute every input mode through ``network[mode] -> [(out, coef)]``."""
    out = defaultdict(complex)
    cache = {}
    for mono, c in poly.items():
        sub = cache.get(mono)
        if sub is None:
            sub = product([network[m] for m in mono])
            cache[mono] = sub
        for m, f in sub.items():
            out[m] += c * f
    return {m: c for m, c in out.items() if c != 0}


def probabilities(poly, tol=1e-15):
    """Fock-basis outcome probabilities ``{monomial: |<n|psi>|^2}``."""
    return {m: abs(c) ** 2 * _occupation_factor(m)
            for m, c in poly.items() if abs(c) ** 2 > tol}
