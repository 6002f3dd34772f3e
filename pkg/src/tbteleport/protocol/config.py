"""Scenario configuration: nested dataclasses loaded from YAML.

Keys carry their unit (``length_km``, ``jitter_ps``).  Every loader error is
a :class:`ConfigError` whose ``path`` points into the nested document.
"""

import copy
import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from ..channel import FiberSpec
from ..detection import DetectorSpec
from ..feedback import DelayLineSpec
from ..validation import ConfigError, check_probability, check_scalar

PRESETS = ("paper_12p3km", "back_to_back")


@dataclass(frozen=True)
class UserConfig:
    mu: float = 0.05
    max_pairs: int = 2
    vbs_ratio: float = 0.5
    phase_rad: float = 0.0
    herald_transmittance: float = 1.0
    idler_transmittance: float = 1.0
    filter_bandwidth_nm: float = 0.18
    input_chirp_per_ps2: float = 0.0

    def validate(self, path):
        check_scalar(self.mu, f"{path}.mu", min_val=0.0, max_val=0.5, include_max=False)
        check_scalar(self.max_pairs, f"{path}.max_pairs", min_val=2, kind=int)
        check_probability(self.vbs_ratio, f"{path}.vbs_ratio")
        check_scalar(self.phase_rad, f"{path}.phase_rad")
        check_probability(self.herald_transmittance, f"{path}.herald_transmittance")
        check_probability(self.idler_transmittance, f"{path}.idler_transmittance")
        check_scalar(self.filter_bandwidth_nm, f"{path}.filter_bandwidth_nm", min_val=0.0,
                     include_min=False)
        check_scalar(self.input_chirp_per_ps2, f"{path}.input_chirp_per_ps2")


@dataclass(frozen=True)
class RelayConfig:
    mu: float = 0.05
    max_pairs: int = 2
    theta_rad: float = 0.0
    input_transmittance: float = 1.0
    idler_transmittance: float = 1.0
    bsm_output_transmittance: float = 1.0
    signal_transmittance: float = 1.0
    filter_bandwidth_nm: float = 0.18
    local_ref_rate_hz: float = 2.0e5
    resolve_same_port_bins: bool = False

    def validate(self, path):
        check_scalar(self.mu, f"{path}.mu", min_val=0.0, max_val=0.5, include_max=False)
        check_scalar(self.max_pairs, f"{path}.max_pairs", min_val=2, kind=int)
        check_scalar(self.theta_rad, f"{path}.theta_rad", min_val=0.0, max_val=2 * np.pi,
                     include_max=False)
        for name in ("input_transmittance", "idler_transmittance",
                     "bsm_output_transmittance", "signal_transmittance"):
            check_probability(getattr(self, name), f"{path}.{name}")
        check_scalar(self.filter_bandwidth_nm, f"{path}.filter_bandwidth_nm", min_val=0.0,
                     include_min=False)
        check_scalar(self.local_ref_rate_hz, f"{path}.local_ref_rate_hz", min_val=0.0)


@dataclass(frozen=True)
class CentralConfig:
    alpha_meas_rad: float = 0.0
    vbs_ratio: float = 0.5
    input_transmittance: float = 1.0

    def validate(self, path):
        check_scalar(self.alpha_meas_rad, f"{path}.alpha_meas_rad")
        check_probability(self.vbs_ratio, f"{path}.vbs_ratio")
        check_probability(self.input_transmittance, f"{path}.input_transmittance")


@dataclass(frozen=True)
class FibersConfig:
    user_relay: FiberSpec = field(default_factory=FiberSpec)
    relay_central: FiberSpec = field(default_factory=FiberSpec)


@dataclass(frozen=True)
class DetectorsConfig:
    herald: DetectorSpec = field(default_factory=lambda: DetectorSpec(efficiency=0.8))
    relay: DetectorSpec = field(default_factory=lambda: DetectorSpec(efficiency=0.9))
    central: DetectorSpec = field(default_factory=lambda: DetectorSpec(efficiency=0.85))
    local: DetectorSpec = field(default_factory=lambda: DetectorSpec(efficiency=0.85))


@dataclass(frozen=True)
class TimingConfig:
    gate_width_ps: float = 200.0
    coincidence_window_ps: float = 200.0
    fourfold_window_ps: float = 2000.0
    herald_pd_jitter_ps: float = 20.0

    def validate(self, path):
        for name in ("gate_width_ps", "coincidence_window_ps", "fourfold_window_ps"):
            check_scalar(getattr(self, name), f"{path}.{name}", min_val=0.0, include_min=False)
        check_scalar(self.herald_pd_jitter_ps, f"{path}.herald_pd_jitter_ps", min_val=0.0)


@dataclass(frozen=True)
class FeedbackConfig:
    enabled: bool = True
    gain: float = 1.0
    period_s: float = 25.0
    window_s: float | None = None
    min_tags: int = 100
    max_tags_per_window: int = 2000
    initial_command_ps: float = 750.0
    delay_line: DelayLineSpec = field(default_factory=DelayLineSpec)

    def validate(self, path):
        check_scalar(self.gain, f"{path}.gain", min_val=0.0, max_val=2.0, include_min=False)
        check_scalar(self.period_s, f"{path}.period_s", min_val=0.0, include_min=False)
        if self.window_s is not None:
            check_scalar(self.window_s, f"{path}.window_s", min_val=0.0,
                         max_val=self.period_s, include_min=False)
        check_scalar(self.min_tags, f"{path}.min_tags", min_val=1, kind=int)
        check_scalar(self.max_tags_per_window, f"{path}.max_tags_per_window",
                     min_val=self.min_tags, kind=int)
        check_scalar(self.initial_command_ps, f"{path}.initial_command_ps", min_val=0.0,
                     max_val=self.delay_line.range_ps)


@dataclass(frozen=True)
class DriftConfig:
    amplitude_c: float = 1.0
    period_s: float = 86400.0
    walk_c_per_sqrt_h: float = 0.05
    step_s: float = 60.0
    trace_csv: str | None = None

    def validate(self, path):
        check_scalar(self.amplitude_c, f"{path}.amplitude_c", min_val=0.0)
        check_scalar(self.period_s, f"{path}.period_s", min_val=0.0, include_min=False)
        check_scalar(self.walk_c_per_sqrt_h, f"{path}.walk_c_per_sqrt_h", min_val=0.0)
        check_scalar(self.step_s, f"{path}.step_s", min_val=0.0, include_min=False)


@dataclass(frozen=True)
class SimulationConfig:
    post_select_single_pair: bool = False
    seed: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "tomography_suite"
    duration_h: float = 4.0
    fringe_points: int = 8
    hom_delays_ps: tuple = (-60.0, -40.0, -30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0,
                            40.0, 60.0, 100.0)

    def validate(self, path):
        kinds = ("fringe_scan", "tomography_suite", "hom_scan", "drift_study", "rate_study")
        if self.kind not in kinds:
            raise ConfigError(f"unknown experiment {self.kind!r}; expected one of {kinds}",
                              f"{path}.kind")
        check_scalar(self.duration_h, f"{path}.duration_h", min_val=0.0, include_min=False)
        check_scalar(self.fringe_points, f"{path}.fringe_points", min_val=5, kind=int)


@dataclass(frozen=True)
class NodeConfig:
    name: str = "custom"
    user: UserConfig = field(default_factory=UserConfig)
    relay: RelayConfig = field(default_factory=RelayConfig)
    central: CentralConfig = field(default_factory=CentralConfig)
    fibers: FibersConfig = field(default_factory=FibersConfig)
    detectors: DetectorsConfig = field(default_factory=DetectorsConfig)
    timing: TimingConfig = field(default_factory=TimingConfig)
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    drift: DriftConfig = field(default_factory=DriftConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def validate(self):
        for f in dataclasses.fields(self):
            sub = getattr(self, f.name)
            if hasattr(sub, "validate"):
                sub.validate(f.name)
        return self

    def replace(self, **changes):
        """Shallow-nested replace: ``cfg.replace(user={"mu": 0.1})``."""
        d = to_dict(self)
        for k, v in changes.items():
            if isinstance(v, dict):
                d[k] = _deep_update(d.get(k, {}), v)
            else:
                d[k] = v
        return from_dict(d)


def _deep_update(base, upd):
    out = copy.deepcopy(base)
    for k, v in upd.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_update(out[k], v)
        else:
            out[k] = v
    return out


def _coerce(value, tp, path):
    origin = getattr(tp, "__args__", None)
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path)
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return value
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", path)
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path)
        return value
    if tp is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"expected a list, got {value!r}", path)
        return tuple(float(v) for v in value)
    if origin:  # Optional[X]
        if value is None:
            return None
        inner = [a for a in origin if a is not type(None)][0]
        return _coerce(value, inner, path)
    return value


def _build(cls, data, path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"expected a mapping, got {type(data).__name__}", path)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError("unknown key", where)
    kwargs = {}
    for name, value in data.items():
        sub = f"{path}.{name}" if path else name
        kwargs[name] = _coerce(value, fields[name].type, sub)
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        if exc.path and path and not exc.path.startswith(path):
            raise ConfigError(str(exc).split(": ", 1)[-1], f"{path}.{exc.path}") from None
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from None


def from_dict(data):
    return _build(NodeConfig, data, "").validate()


def to_dict(cfg):
    def conv(v):
        if dataclasses.is_dataclass(v):
            return {f.name: conv(getattr(v, f.name)) for f in dataclasses.fields(v)}
        if isinstance(v, tuple):
            return [conv(x) for x in v]
        return v
    return conv(cfg)


def _parse_yaml(text, source):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"YAML parse error: {problem}", where) from None
    return data or {}


def preset_text(name):
    return resources.files(__package__).joinpath("presets", f"{name}.yaml").read_text()


def load_scenario(source, overrides=()):
    """Load a preset name or YAML path and apply ``key=value`` overrides (validated)."""
    p = Path(str(source))
    if str(source) in PRESETS and not p.exists():
        data = _parse_yaml(preset_text(str(source)), f"<preset {source}>")
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read scenario: {exc.strerror}", str(source)) from None
        data = _parse_yaml(text, str(source))
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping", str(source))
    for item in overrides:
        data = apply_override(data, item)
    return from_dict(data)


def apply_override(data, item):
    """Apply one ``dotted.key=value`` override; the key must exist."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value", item)
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    defaults = to_dict(NodeConfig())
    node, ref = data, defaults
    for i, part in enumerate(parts):
        if not isinstance(ref, dict) or part not in ref:
            raise ConfigError("unknown key", ".".join(parts[: i + 1]))
        ref = ref[part]
        if i < len(parts) - 1:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError("not a mapping", ".".join(parts[: i + 1]))
    data = copy.deepcopy(data)
    node = data
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = yaml.safe_load(raw)
    return data


def diagnose(source, overrides=()):
    """All problems found while loading, as human-readable lines (empty = clean).

    Each top-level section is checked on its own so that one bad section
    does not hide problems in another.  Nothing is simulated.
    """
    try:
        cfg = load_scenario(source, overrides)
    except ConfigError:
        pass
    else:
        problems = []
        if cfg.simulation.post_select_single_pair and cfg.user.mu == 0:
            problems.append("simulation.post_select_single_pair: user.mu = 0 yields no events")
        return problems
    p = Path(str(source))
    try:
        if str(source) in PRESETS and not p.exists():
            data = _parse_yaml(preset_text(str(source)), f"<preset {source}>")
        else:
            data = _parse_yaml(p.read_text(), str(source))
        for item in overrides:
            data = apply_override(data, item)
    except OSError as exc:
        return [str(ConfigError(f"cannot read scenario: {exc.strerror}", str(source)))]
    except ConfigError as exc:
        return [str(exc)]
    if not isinstance(data, dict):
        return [str(ConfigError("scenario must be a mapping", str(source)))]
    problems = []
    fields = {f.name: f for f in dataclasses.fields(NodeConfig)}
    for key in sorted(set(data) - set(fields)):
        problems.append(str(ConfigError("unknown key", key)))
    for name, f in fields.items():
        if name not in data:
            continue
        try:
            sub = _coerce(data[name], f.type, name)
            if hasattr(sub, "validate"):
                sub.validate(name)
        except ConfigError as exc:
            problems.append(str(exc))
    return problems or [str(exc) for exc in _first_error(data)]


def _first_error(data):
    try:
        from_dict(data)
    except ConfigError as exc:
        return [exc]
    return []
