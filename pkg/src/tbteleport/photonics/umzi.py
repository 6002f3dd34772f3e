"""Projective time-bin analyzer at the central node (VBS-UMZI)."""

import numpy as np

from ..validation import check_scalar

OUT_PORTS = ("B1", "B2")


def umzi_network(alpha_meas, vbs_ratio=0.5):
    """Output amplitudes for an input photon in bin 0 or 1.

    Returns ``{input_bin: [((port, out_bin), amplitude), ...]}`` with output
    bins 0..2.  The long arm adds one bin of delay and the phase
    ``alpha_meas``; B1 in the middle bin projects onto
    ``|0> + e^{i alpha_meas}|1>``.
    """
    check_scalar(vbs_ratio, "vbs_ratio", min_val=0.0, max_val=1.0)
    short = np.sqrt(1.0 - vbs_ratio)
    long_ = np.sqrt(vbs_ratio) * np.exp(1j * alpha_meas)
    s = 1.0 / np.sqrt(2.0)
    net = {}
    for k in (0, 1):
        net[k] = [
            (("B1", k), short * s),
            (("B2", k), short * s),
            (("B1", k + 1), long_ * s),
            (("B2", k + 1), -long_ * s),
        ]
    return net


def projective_umzi(photon, alpha_meas, vbs_ratio=0.5):
    """Detection probabilities ``{(port, bin): p}`` for a single photon."""
    if not photon.alive:
        raise ValueError("photon was lost before the analyzer")
    a = np.asarray(photon.bin_amplitudes, dtype=complex)
    amps = {}
    for k, outs in umzi_network(alpha_meas, vbs_ratio).items():
        for key, f in outs:
            amps[key] = amps.get(key, 0j) + f * a[k]
    return {key: float(abs(v) ** 2) for key, v in sorted(amps.items())}
