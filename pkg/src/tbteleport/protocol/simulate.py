"""Pulse-level and batched simulation of the teleportation link."""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..channel import TemperatureTrace, drift_offset_at, propagate
from ..detection import (CHANNEL_NAMES, CHANNELS, CoincidenceEvent, TagStream, TimeTag,
                         classify_bin, classify_bsm, find_coincidences)
from ..feedback import FeedbackState, control_step, estimate_delta
from ..photonics.sources import (BIN_SEPARATION_PS, PULSE_PERIOD_PS, SourceSpec, apply_loss,
                                 encode_user_qubit, generate_bell_pair, generate_heralded_pairs)
from ..photonics.bsm import classify_clicks
from ..photonics.wavepacket import mode_overlap
from ..qstate import BellState
from ..rng import substream
from .model import BSM_GATES, CENTRAL_GATES, GATES, LinkModel, evaluate, user_amplitudes

PULSES_PER_S = 1e12 / PULSE_PERIOD_PS

# Static cable/electronics offsets of each detector channel (ps), before fiber delay.
_BASE_DELAY_PS = {"A1": 1_000, "HERALD": 1_500, "C7": 2_500, "SYNC": 500}
_RELAY_DELAY_PS = 2_000
_CENTRAL_DELAY_PS = 3_000


def channel_delays(cfg):
    """Fixed arrival offset of every channel relative to its pulse clock edge."""
    d = dict(_BASE_DELAY_PS)
    for p in ("C1", "C2", "C3", "C4"):
        d[p] = _RELAY_DELAY_PS
    central = _CENTRAL_DELAY_PS + int(round(cfg.fibers.relay_central.nominal_delay_ps))
    d["B1"] = d["B2"] = central
    d["SYNC"] += central
    return d


def frame_reference(t, delay, period=PULSE_PERIOD_PS):
    """Start of the clock frame containing a tag whose bins span 0..800 ps."""
    k = np.floor((t - delay - BIN_SEPARATION_PS) / period + 0.5)
    return delay + k * period


@dataclass(frozen=True)
class TeleportationEvent:
    pulse_index: int
    bsm: BellState
    central_click: tuple
    herald_present: bool = True
    alpha_meas: float = 0.0

    def __post_init__(self):
        if self.bsm not in (BellState.PSI_PLUS, BellState.PSI_MINUS):
            raise ValueError(f"only PsiPlus/PsiMinus events exist, got {self.bsm}")


@dataclass
class ExperimentResult:
    """Raw output of :func:`run_experiment` for one measurement setting."""

    duration_s: float
    setting: dict
    events: list = field(default_factory=list)
    tags: TagStream = field(default_factory=TagStream)
    feedback: FeedbackState = field(default_factory=FeedbackState)
    period_epochs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    true_delta_ps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    temperature_c: np.ndarray = field(default_factory=lambda: np.zeros(0))
    herald_count: int = 0
    threefold_count: int = 0
    fourfold_count: int = 0
    assembly_stats: Counter = field(default_factory=Counter)

    @property
    def n_pulses(self):
        return int(np.floor(self.duration_s * PULSES_PER_S))


# --- single cycle ------------------------------------------------------

def _gate_clicks(occ, model, rng):
    q = model.no_click(occ)
    return rng.random(q.size) >= q


def run_pulse(cfg, clock_time, drift, rng, *, model=None, user_state=None, alpha_meas=None,
              pulse_index=None):
    """Simulate one 10 ns clock cycle photon by photon.

    Returns ``(event, tags)``; ``event`` is ``None`` unless the pulse yields a
    four-fold coincidence whose analyzer clicks announce a Psi outcome.  Optical interference is sampled from the exact outcome
    model at the overlap of the propagated wavepackets.
    """
    model = model or LinkModel(cfg)
    u, r = cfg.user, cfg.relay
    if user_state is None:
        user_state = (u.vbs_ratio, u.phase_rad)
    alpha = cfg.central.alpha_meas_rad if alpha_meas is None else alpha_meas
    k = int(round(clock_time * PULSES_PER_S)) if pulse_index is None else int(pulse_index)
    t0 = k * PULSE_PERIOD_PS
    delays = channel_delays(cfg)
    det = cfg.detectors
    tags = []

    def stamp(name, offset, jitter):
        t = t0 + delays[name] + offset + (rng.normal(0.0, jitter) if jitter > 0 else 0.0)
        tags.append(TimeTag(CHANNELS[name], int(round(t))))

    user = generate_heralded_pairs(SourceSpec(u.mu, u.max_pairs), rng, pulse_index=k,
                                   wavepacket=model.user_source_wavepacket)
    signals = [p for p in user.photons if p.role == "signal"]
    idlers = [p for p in user.photons if p.role == "idler"]
    heralded = any(apply_loss(s, u.herald_transmittance, rng).alive
                   and rng.random() < det.herald.efficiency for s in signals)
    heralded = heralded or rng.random() < model.herald_dark
    if heralded:
        stamp("A1", 0.0, det.herald.jitter_ps)
        stamp("HERALD", drift, cfg.timing.herald_pd_jitter_ps)
    if rng.random() < r.local_ref_rate_hz / PULSES_PER_S:
        stamp("C7", 0.0, det.local.jitter_ps)

    arrived = []
    for idler in idlers:
        p = encode_user_qubit(idler, vbs_ratio=u.vbs_ratio, phase=u.phase_rad)
        p = apply_loss(p, u.idler_transmittance, rng)
        p = propagate(p, cfg.fibers.user_relay, drift, rng)
        p = apply_loss(p, r.input_transmittance, rng)
        if p.alive:
            arrived.append(p)
    relay = generate_bell_pair(r.theta_rad, rng, SourceSpec(r.mu, r.max_pairs),
                               pulse_index=k, wavepacket=model.relay_wavepacket)
    m, n_pairs = len(arrived), relay.pairs
    if cfg.simulation.post_select_single_pair and (len(idlers) != 1 or n_pairs != 1):
        return None, TagStream.from_tags(tags)

    g = 1.0
    if arrived:
        reference = model.relay_wavepacket.shifted(cfg.fibers.user_relay.nominal_delay_ps)
        g = min(abs(mode_overlap(arrived[0].wavepacket, reference)) ** 2, 1.0)
    table = model.outcome_table(m, n_pairs, user_state, alpha)
    probs = table.probabilities(g)
    total = probs.sum()
    if total <= 0:
        return None, TagStream.from_tags(tags)
    outcome = table.occ[rng.choice(probs.size, p=probs / total)]
    clicks = _gate_clicks(outcome, model, rng)
    for gi in np.nonzero(clicks)[0]:
        port, b = GATES[gi]
        spec = det.relay if gi < len(BSM_GATES) else det.central
        stamp(port, b * BIN_SEPARATION_PS, spec.jitter_ps)

    bsm_hits = [GATES[i] for i in np.nonzero(clicks[: len(BSM_GATES)])[0]]
    central_hits = [CENTRAL_GATES[i] for i in np.nonzero(clicks[len(BSM_GATES):])[0]]
    event = None
    if heralded and len(bsm_hits) == 2 and len(central_hits) == 1:
        outcome_bell = classify_clicks(tuple(sorted(bsm_hits)), r.resolve_same_port_bins)
        if outcome_bell is not None:
            event = TeleportationEvent(k, outcome_bell, central_hits[0], True, float(alpha))
    return event, TagStream.from_tags(tags)


# --- tag helpers ---------------------------------------------------------

def _timing_times(cfg, herald_pulses, local_pulses, delta_ps, rng, delays):
    jh = cfg.timing.herald_pd_jitter_ps
    jl = cfg.detectors.local.jitter_ps
    hp = np.asarray(herald_pulses, dtype=np.int64)
    lp = np.asarray(local_pulses, dtype=np.int64)
    th = delta_ps + (rng.normal(0.0, jh, hp.size) if jh > 0 else np.zeros(hp.size))
    tl = rng.normal(0.0, jl, lp.size) if jl > 0 else np.zeros(lp.size)
    th = hp * PULSE_PERIOD_PS + delays["HERALD"] + np.rint(th).astype(np.int64)
    tl = lp * PULSE_PERIOD_PS + delays["C7"] + np.rint(tl).astype(np.int64)
    return th, tl


def herald_and_sync_tags(cfg, herald_pulses, local_pulses, delta_ps, rng, sync_pulses=()):
    """Timing streams used by the delay feedback and the central frame clock.

    ``T_Herald`` tags ride the user->relay fiber and so carry ``delta_ps``;
    ``T_Local`` tags come from the relay's own detector C7; the sync stream
    marks clock frames at the central node.
    """
    d = channel_delays(cfg)
    th, tl = _timing_times(cfg, herald_pulses, local_pulses, delta_ps, rng, d)
    ts = np.asarray(sync_pulses, dtype=np.int64) * PULSE_PERIOD_PS + d["SYNC"]

    def mk(name, t):
        return TagStream.from_unsorted(np.full(t.size, CHANNELS[name]), t)

    return mk("HERALD", th), mk("C7", tl), mk("SYNC", ts)


def reference_offset(cfg):
    d = channel_delays(cfg)
    return d["HERALD"] - d["C7"]


def event_tags(cfg, model, class_ids, pulses, rng):
    """Detector tags for sampled four-fold classes at the given pulses."""
    det = cfg.detectors
    d = channel_delays(cfg)
    n = len(class_ids)
    if n == 0:
        return TagStream()
    chans, times = [], []
    base = np.asarray(pulses, dtype=np.int64) * PULSE_PERIOD_PS

    def add(names, bins, jitter):
        ch = np.array([CHANNELS[x] for x in names], dtype=np.uint16)
        off = np.array([d[x] for x in names], dtype=np.int64) + np.asarray(bins) * BIN_SEPARATION_PS
        j = np.rint(rng.normal(0.0, jitter, n)).astype(np.int64) if jitter > 0 else 0
        chans.append(ch)
        times.append(base + off + j)

    cls = [model.classes[i] for i in class_ids]
    add(["A1"] * n, np.zeros(n, dtype=np.int64), det.herald.jitter_ps)
    for slot in (0, 1):
        add([c.bsm_gates[slot][0] for c in cls], [c.bsm_gates[slot][1] for c in cls],
            det.relay.jitter_ps)
    add([c.central_gate[0] for c in cls], [c.central_gate[1] for c in cls], det.central.jitter_ps)
    return TagStream.from_unsorted(np.concatenate(chans), np.concatenate(times))


FOURFOLD_PATTERN = {("A1",): 1, ("C1", "C2", "C3", "C4"): 2, ("B1", "B2"): 1}


def assemble_events(tags, cfg, alpha_meas=0.0, stats=None):
    """Four-fold coincidences -> :class:`TeleportationEvent` list."""
    stats = Counter() if stats is None else stats
    delays = channel_delays(cfg)
    gate = cfg.timing.gate_width_ps
    coinc = find_coincidences([tags], cfg.timing.fourfold_window_ps, FOURFOLD_PATTERN,
                              delays={k: v for k, v in delays.items() if k in CHANNELS})
    events = []
    for ev in coinc:
        if len(ev.tags) != 4:
            stats["surplus"] += 1
            continue
        labels = []
        for t in ev.tags:
            name = CHANNEL_NAMES[t.channel]
            if name == "A1":
                labels.append(None)
                continue
            ref = frame_reference(t.time, delays[name])
            labels.append(classify_bin(t.time, ref, BIN_SEPARATION_PS, gate, 3, stats=stats))
        ev = CoincidenceEvent(ev.tags, ev.kind, tuple(labels))
        bsm = classify_bsm(ev, cfg.relay.resolve_same_port_bins)
        central = [(CHANNEL_NAMES[t.channel], b) for t, b in zip(ev.tags, labels)
                   if CHANNEL_NAMES[t.channel] in ("B1", "B2")]
        if bsm is None or central[0][1] is None:
            stats["unclassified"] += 1
            continue
        a1 = next(t for t in ev.tags if CHANNEL_NAMES[t.channel] == "A1")
        pulse = int(np.floor((a1.time - delays["A1"]) / PULSE_PERIOD_PS + 0.5))
        events.append(TeleportationEvent(pulse, bsm, central[0], True, float(alpha_meas)))
    stats["assembled"] += len(events)
    return events


# --- batched experiment ------------------------------------------------

def drift_trace(cfg, duration_s, rng):
    dr = cfg.drift
    if dr.trace_csv:
        return TemperatureTrace.from_csv(dr.trace_csv)
    return TemperatureTrace.diurnal(max(duration_s, dr.step_s), rng, amplitude_c=dr.amplitude_c,
                                    period_s=dr.period_s, walk_c_per_sqrt_h=dr.walk_c_per_sqrt_h,
                                    step_s=dr.step_s)


def run_experiment(cfg, duration_s, feedback_on=None, rng_seed=0, *, user_state=None,
                   alpha_meas=None, model=None, keep_tags=True, trace=None):
    """Simulate ``floor(duration_s * 1e8)`` pulses for one setting.

    Pulses are grouped into control periods.  Inside a period the drift and
    the delay-line command are constant, so the four-fold classes are
    Poisson with means fixed by the exact outcome model; only pulses that
    produce an event are materialized as tags.  The feedback loop runs at
    the end of every period on freshly sampled herald/local timing tags.
    """
    if duration_s < 0:
        raise ValueError("duration must be >= 0")
    model = model or LinkModel(cfg)
    fb = cfg.feedback
    feedback_on = fb.enabled if feedback_on is None else bool(feedback_on)
    if user_state is None:
        user_state = (cfg.user.vbs_ratio, cfg.user.phase_rad)
    alpha = cfg.central.alpha_meas_rad if alpha_meas is None else float(alpha_meas)
    amps = user_amplitudes(user_state)
    setting = {"user_amplitudes": [[float(a.real), float(a.imag)] for a in amps],
               "alpha_meas_rad": alpha, "feedback": feedback_on}
    state = FeedbackState(setpoint=0.0, current_command=fb.initial_command_ps)
    result = ExperimentResult(float(duration_s), setting, feedback=state)
    total_pulses = int(np.floor(duration_s * PULSES_PER_S))
    if total_pulses == 0:
        return result

    rng_ev = substream(rng_seed, "protocol", "events")
    rng_tag = substream(rng_seed, "detection", "jitter")
    rng_fb = substream(rng_seed, "feedback", "tags")
    if trace is None:
        trace = drift_trace(cfg, duration_s, substream(rng_seed, "channel", "drift"))
    coef, three = model.fourfold_coefficients(user_state, alpha)
    p_herald = model.herald_probability()
    fiber = cfg.fibers.user_relay
    ref_off = reference_offset(cfg)
    delays = channel_delays(cfg)
    r_local = cfg.relay.local_ref_rate_hz
    lo, hi = trace.span

    period_pulses = int(round(fb.period_s * PULSES_PER_S))
    n_periods = -(-total_pulses // period_pulses)
    epochs = np.zeros(n_periods)
    deltas = np.zeros(n_periods)
    temps = np.zeros(n_periods)
    class_ids, pulse_ids = [], []
    c0 = fb.initial_command_ps
    for k in range(n_periods):
        start = k * period_pulses
        n_p = min(period_pulses, total_pulses - start)
        span_s = n_p / PULSES_PER_S
        t_mid = min(max((start + n_p / 2) / PULSES_PER_S, lo), hi)
        delta = float(drift_offset_at(trace, fiber, t_mid)) + (state.current_command - c0)
        g = model.overlap(delta)
        lam = n_p * evaluate(coef, g)
        counts = rng_ev.poisson(lam)
        n4 = int(counts.sum())
        n3 = n4 + int(rng_ev.poisson(max(n_p * float(evaluate(three, g)) - lam.sum(), 0.0)))
        nh = n3 + int(rng_ev.poisson(max(n_p * p_herald - n_p * float(evaluate(three, g)), 0.0)))
        result.fourfold_count += n4
        result.threefold_count += n3
        result.herald_count += nh
        if n4:
            ids = np.repeat(np.arange(coef.shape[0]), counts)
            pulses = rng_ev.integers(start, start + n_p, size=n4)
            order = np.argsort(pulses, kind="stable")
            class_ids.append(ids[order])
            pulse_ids.append(pulses[order])

        # Delay estimate from this period's timing tags.
        window = span_s if fb.window_s is None else min(fb.window_s, span_s)
        w_pulses = max(int(window * PULSES_PER_S), 1)
        w0 = start + n_p - w_pulses
        nh_fb = min(int(rng_fb.poisson(p_herald * PULSES_PER_S * window)), fb.max_tags_per_window)
        nl_fb = min(int(rng_fb.poisson(r_local * window)), fb.max_tags_per_window)
        hp = np.sort(rng_fb.integers(w0, w0 + w_pulses, size=nh_fb))
        lp = np.sort(rng_fb.integers(w0, w0 + w_pulses, size=nl_fb))
        th, tl = _timing_times(cfg, hp, lp, delta, rng_fb, delays)
        measured = estimate_delta(th, np.sort(tl), reference_offset=ref_off, min_tags=fb.min_tags)
        epoch = (start + n_p) / PULSES_PER_S
        if feedback_on:
            cmd, sat = control_step(state, measured, fb.delay_line, fb.gain)
        else:
            cmd, sat = state.current_command, False
        state.record(epoch, measured, cmd, sat)
        epochs[k] = epoch
        deltas[k] = delta
        temps[k] = float(trace.temp_at(t_mid))

    result.period_epochs = epochs
    result.true_delta_ps = deltas
    result.temperature_c = temps
    if class_ids:
        ids = np.concatenate(class_ids)
        pulses = np.concatenate(pulse_ids)
        tags = event_tags(cfg, model, ids, pulses, rng_tag)
        result.events = assemble_events(tags, cfg, alpha, result.assembly_stats)
        if keep_tags:
            result.tags = tags
    return result
