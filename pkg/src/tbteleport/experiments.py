"""Named measurement campaigns built on the simulator and the analysis tools."""

from collections import Counter

import numpy as np

from .analysis import (event_rate, fit_sinusoid, fringe_max_rate, hom_scan,
                       teleport_tomography)
from .analysis.report import RunReport
from .detection import TagStream, merge_channels
from .protocol.config import to_dict
from .protocol.model import LinkModel
from .protocol.simulate import run_experiment
from .qstate import SIX_STATES, BellState
from .rng import derive_seed, substream

KINDS = ("fringe_scan", "tomography_suite", "hom_scan", "drift_study", "rate_study")
MIDDLE = {"B1": ("B1", 1), "B2": ("B2", 1)}


def _merge(runs):
    """Concatenate per-setting tag archives as consecutive measurement blocks."""
    out, offset = TagStream(), 0
    for r in runs:
        if len(r.tags):
            out = merge_channels(out, r.tags.shifted(offset))
        offset += int(round(r.duration_s * 1e12))
    return out


def _counts(res):
    return {"herald": res.herald_count, "threefold": res.threefold_count,
            "fourfold": res.fourfold_count, "assembled": len(res.events)}


def fringe_scan(cfg, seed, duration_h, feedback_on=None, model=None, points=None):
    """Sweep the encoding phase and fit middle-bin fringes per Bell outcome."""
    model = model or LinkModel(cfg)
    n = points or cfg.experiment.fringe_points
    phis = 2 * np.pi * np.arange(n) / n
    rows, runs = [], []
    table = {o: {p: [] for p in MIDDLE} for o in (BellState.PSI_PLUS, BellState.PSI_MINUS)}
    for i, phi in enumerate(phis):
        res = run_experiment(cfg, duration_h * 3600, feedback_on, derive_seed(seed, "fringe", i),
                             user_state=(cfg.user.vbs_ratio, float(phi)), model=model)
        runs.append(res)
        c = Counter((e.bsm, e.central_click) for e in res.events)
        for o, per in table.items():
            for port, gate in MIDDLE.items():
                per[port].append(c.get((o, gate), 0))
        rows.append({"phi_rad": float(phi), **_counts(res)})
    fits = {o: fit_sinusoid(phis, per["B1"]) for o, per in table.items()}
    vis = float(np.mean([f.visibility for f in fits.values()]))
    rate = fringe_max_rate(list(fits.values()), duration_h)
    results = {
        "phis_rad": phis,
        "counts_B1_t1": {o.value: per["B1"] for o, per in table.items()},
        "counts_B2_t1": {o.value: per["B2"] for o, per in table.items()},
        "fits": {o.value: f.as_dict() for o, f in fits.items()},
        "average_visibility": vis,
        "fringe_max_rate": rate.as_dict(),
        "settings": rows,
    }
    summary = [{"table": "fringe", "outcome": o.value, "visibility": f.visibility,
                "maximum": f.maximum, "minimum": f.minimum, "phase_rad": f.phase}
               for o, f in fits.items()]
    summary.append({"table": "fringe", "outcome": "average", "visibility": vis,
                    "rate_per_hour": rate.per_hour})
    return results, summary, runs


def tomography_suite(cfg, seed, duration_h, feedback_on=None, model=None, states=None):
    """Per-outcome fidelities of six input states, each measured at both central settings."""
    model = model or LinkModel(cfg)
    states = states or SIX_STATES
    per_state, summary, runs = {}, [], []
    fids = {BellState.PSI_PLUS: [], BellState.PSI_MINUS: []}
    for label, qubit in states.items():
        events = []
        for alpha in (0.0, np.pi / 2):
            res = run_experiment(cfg, duration_h * 3600, feedback_on,
                                 derive_seed(seed, "tomography", label, alpha > 0),
                                 user_state=qubit, alpha_meas=alpha, model=model)
            runs.append(res)
            events.extend(res.events)
        tomo = teleport_tomography(events, qubit)
        per_state[label] = {o.value: r.as_dict() for o, r in tomo.items()}
        for o, r in tomo.items():
            fids[o].append(r.fidelity)
            summary.append({"table": "fidelity", "state": label, "outcome": o.value,
                            "fidelity": r.fidelity, "events": r.n_events})
    averages = {o.value: float(np.mean(v)) if v else None for o, v in fids.items()}
    for o, v in averages.items():
        summary.append({"table": "fidelity", "state": "average", "outcome": o, "fidelity": v})
    return {"states": per_state, "average_fidelity": averages}, summary, runs


def hom_experiment(cfg, seed, duration_h, model=None):
    delays = np.asarray(cfg.experiment.hom_delays_ps, dtype=float)
    scan = hom_scan(cfg, delays, duration_s=duration_h * 3600 / delays.size,
                    rng=substream(seed, "hom"), model=model)
    summary = [{"table": "hom", "delay_ps": float(d), "counts": float(c), "normalized": float(x)}
               for d, c, x in zip(scan.delays_ps, scan.counts, scan.normalized)]
    summary.append({"table": "hom", "visibility": scan.visibility,
                    "fit_visibility": scan.fit_visibility})
    return scan.as_dict(), summary, []


def drift_summary(res):
    """Temperature sensitivity and residual delay spread of one long run."""
    hist = res.feedback.history
    measured = np.array([np.nan if h[1] is None else h[1] for h in hist])
    ok = np.isfinite(measured)
    temps = res.temperature_c
    out = {
        "periods": len(hist),
        "true_delta_std_ps": float(np.std(res.true_delta_ps)) if hist else 0.0,
        "true_delta_swing_ps": float(np.ptp(res.true_delta_ps)) if hist else 0.0,
        "measured_std_ps": float(np.std(measured[ok])) if ok.any() else None,
        "measured_swing_ps": float(np.ptp(measured[ok])) if ok.any() else None,
        "temperature_swing_c": float(np.ptp(temps)) if hist else 0.0,
        "saturated_periods": int(sum(h[3] for h in hist)),
        "missing_measurements": int((~ok).sum()),
    }
    if ok.sum() > 2 and np.ptp(temps[ok]) > 0:
        slope = np.polyfit(temps[ok], measured[ok], 1)[0]
        out["delay_per_2c_ps"] = float(2.0 * abs(slope))
    return out


def drift_study(cfg, seed, duration_h, feedback_on=None, model=None):
    res = run_experiment(cfg, duration_h * 3600, feedback_on, derive_seed(seed, "drift"),
                         model=model, keep_tags=False)
    info = drift_summary(res)
    info["feedback"] = res.setting["feedback"]
    info["counts"] = _counts(res)
    summary = [{"table": "drift", **{k: v for k, v in info.items() if not isinstance(v, dict)}}]
    return info, summary, [res]


def rate_study(cfg, seed, duration_h, feedback_on=None, model=None):
    results, summary, runs = fringe_scan(cfg, seed, duration_h, feedback_on, model)
    total = sum(len(r.events) for r in runs)
    hours = duration_h * len(runs)
    overall = event_rate(total, hours)
    results = {"fringe_max_rate": results["fringe_max_rate"],
               "all_fourfold_rate": overall.as_dict(),
               "average_visibility": results["average_visibility"]}
    summary = [{"table": "rate", "definition": "fringe_max", **{
        "rate_per_hour": results["fringe_max_rate"]["per_hour"],
        "stderr": results["fringe_max_rate"]["stderr"]}},
        {"table": "rate", "definition": "all_fourfold", "rate_per_hour": overall.per_hour,
         "stderr": overall.stderr}]
    return results, summary, runs


def run_named(kind, cfg, seed, duration_h=None, feedback_on=None, name=None):
    """Run one campaign; returns ``(RunReport, merged tags, per-setting results)``."""
    if kind not in KINDS:
        raise ValueError(f"unknown experiment {kind!r}; expected one of {KINDS}")
    duration_h = cfg.experiment.duration_h if duration_h is None else float(duration_h)
    if duration_h <= 0:
        raise ValueError("duration must be > 0")
    model = LinkModel(cfg)
    if kind == "fringe_scan":
        results, summary, runs = fringe_scan(cfg, seed, duration_h, feedback_on, model)
    elif kind == "tomography_suite":
        results, summary, runs = tomography_suite(cfg, seed, duration_h, feedback_on, model)
    elif kind == "hom_scan":
        results, summary, runs = hom_experiment(cfg, seed, duration_h, model)
    elif kind == "drift_study":
        results, summary, runs = drift_study(cfg, seed, duration_h, feedback_on, model)
    else:
        results, summary, runs = rate_study(cfg, seed, duration_h, feedback_on, model)
    report = RunReport(name or cfg.name, kind, int(seed), duration_h, to_dict(cfg), results,
                       summary)
    return report, _merge(runs), runs
