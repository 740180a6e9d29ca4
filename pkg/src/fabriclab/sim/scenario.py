"""Scenario files: schema, validation, and derived sizing.

A scenario is a YAML document with sections ``topology``, ``transport``,
``pfc``, ``ecn``, ``routing``, ``traffic`` plus a top-level ``seed``.
Unknown keys are rejected so that sweep parameter paths cannot silently
miss.  Fields accepting ``auto`` are resolved against the topology when the
scenario is built into a run.
"""

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from ..budget import LinkGeometry
from ..units import PS_PER_S, ceil_div, gbps_to_bps, ns_to_ps, us_to_ps

_AUTO = "auto"


class ScenarioError(ValueError):
    """Invalid scenario content; message names the offending key."""


@dataclass
class TopologyConfig:
    tiers: int = 2
    radix: int = 8
    bandwidth_gbps: float = 800.0
    per_hop_ns: float = 600.0
    cable_m: float = 0.0
    wire_ns_per_m: float = 5.0
    mtu_bytes: int = 9216


@dataclass
class CcConfig:
    mode: str = "rate"              # rate | window
    decrease_factor: float = 0.5
    increase_period_us: float = 10.0
    increase_step_gbps: float = 25.0
    min_rate_gbps: float = 1.0


@dataclass
class TransportConfig:
    mode: str = "go_back_n"         # go_back_n | selective
    window_bytes: object = _AUTO    # auto -> one BDP (window cc mode only)
    timeout_us: float = 500.0
    header_bytes: int = 66
    nack_guard_us: object = _AUTO   # auto -> one estimated fabric RTT
    reorder_limit_pkts: int = 4096
    cc: CcConfig = field(default_factory=CcConfig)


@dataclass
class PfcConfig:
    enabled: bool = True
    classes: int = 1
    headroom_bytes: object = _AUTO  # auto -> link BDP + 2 MTU
    buffer_bytes: object = _AUTO    # per (port, class); auto -> 2x headroom


@dataclass
class EcnConfig:
    enabled: bool = True
    threshold_bytes: object = _AUTO  # auto -> half the end-to-end BDP


@dataclass
class RoutingConfig:
    policy: str = "ecmp"            # ecmp | flowlet | spray
    flowlet_gap_us: float = 1.0


@dataclass
class LossRule:
    """Drops on the directed link src->dst: first attempts of drop_seqs,
    plus an independent Bernoulli(probability) coin per transmission."""
    src: str
    dst: str
    probability: float = 0.0
    drop_seqs: tuple = ()


@dataclass
class SimConfig:
    horizon_us: float = 0.0         # 0 = unbounded
    watchdog_us: float = 50000.0
    sample_interval_us: float = 10.0


@dataclass
class Scenario:
    scenario_id: str = "scenario"
    seed: int = 1
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    transport: TransportConfig = field(default_factory=TransportConfig)
    pfc: PfcConfig = field(default_factory=PfcConfig)
    ecn: EcnConfig = field(default_factory=EcnConfig)
    routing: RoutingConfig = field(default_factory=RoutingConfig)
    traffic: dict = field(default_factory=lambda: {"motif": "incast"})
    loss: tuple = ()
    sim: SimConfig = field(default_factory=SimConfig)

    # ---- derived sizing ---------------------------------------------------

    def link_geometry(self):
        t = self.topology
        return LinkGeometry(
            bandwidth_bps=gbps_to_bps(t.bandwidth_gbps),
            cable_length_m=t.cable_m,
            wire_delay_ns_per_m=t.wire_ns_per_m,
            per_hop_latency_ns=t.per_hop_ns,
            mtu_bytes=t.mtu_bytes,
        )

    def link_rtt_ps(self):
        return 2 * self.link_geometry().one_way_latency_ps

    def fabric_rtt_ps(self):
        """Round trip across the fabric: 2 tiers' worth of links each way,
        counting per-hop latency and wire delay, no queueing."""
        t = self.topology
        lat = ns_to_ps(t.per_hop_ns) + round(t.cable_m * t.wire_ns_per_m * 1000)
        return 4 * t.tiers * lat

    def bdp_bytes(self, rtt_ps=None):
        if rtt_ps is None:
            rtt_ps = self.fabric_rtt_ps()
        bw = gbps_to_bps(self.topology.bandwidth_gbps)
        return ceil_div(bw * rtt_ps, 8 * PS_PER_S)

    def headroom_bytes(self):
        if self.pfc.headroom_bytes != _AUTO:
            return int(self.pfc.headroom_bytes)
        # link BDP covers in-flight bytes after XOFF; one MTU for the packet
        # already serializing, one more because the trigger fires at packet
        # granularity past the mark
        return self.bdp_bytes(self.link_rtt_ps()) + 2 * self.topology.mtu_bytes

    def buffer_bytes(self):
        if self.pfc.buffer_bytes != _AUTO:
            return int(self.pfc.buffer_bytes)
        return 2 * self.headroom_bytes()

    def ecn_threshold_bytes(self):
        if not self.ecn.enabled:
            return -1
        if self.ecn.threshold_bytes != _AUTO:
            return int(self.ecn.threshold_bytes)
        return max(self.topology.mtu_bytes, self.bdp_bytes() // 2)

    def window_bytes(self):
        if self.transport.window_bytes != _AUTO:
            return int(self.transport.window_bytes)
        return max(self.topology.mtu_bytes, self.bdp_bytes())

    def nack_guard_ps(self):
        if self.transport.nack_guard_us != _AUTO:
            return us_to_ps(float(self.transport.nack_guard_us))
        return self.fabric_rtt_ps()

    # ---- sweep support ----------------------------------------------------

    def with_path(self, path, value):
        """Return a copy with the dotted ``path`` (e.g. ``pfc.headroom_bytes``
        or ``traffic.sources``) replaced by ``value``."""
        head, _, rest = path.partition(".")
        if not rest:
            if head in ("seed", "scenario_id"):
                return replace(self, **{head: value})
            raise ScenarioError(f"unknown parameter path: {path}")
        section = getattr(self, head, None)
        if section is None:
            raise ScenarioError(f"unknown parameter path: {path}")
        if head == "traffic":
            traffic = dict(self.traffic)
            traffic[rest] = value
            return replace(self, traffic=traffic)
        return replace(self, **{head: _set_nested(section, rest, path, value)})


def _set_nested(obj, rest, full, value):
    head, _, tail = rest.partition(".")
    names = {f.name for f in fields(obj)}
    if head not in names:
        raise ScenarioError(f"unknown parameter path: {full}")
    if tail:
        return replace(obj, **{head: _set_nested(getattr(obj, head), tail, full, value)})
    return replace(obj, **{head: value})


# ---------------------------------------------------------------------------
# loading

_SECTIONS = {
    "topology": TopologyConfig,
    "transport": TransportConfig,
    "pfc": PfcConfig,
    "ecn": EcnConfig,
    "routing": RoutingConfig,
    "sim": SimConfig,
}


def _build_section(cls, data, where):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError(f"section '{where}' must be a mapping")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, val in data.items():
        if key not in known:
            raise ScenarioError(f"unknown key '{where}.{key}'")
        if key == "cc":
            val = _build_section(CcConfig, val, f"{where}.cc")
        kwargs[key] = val
    return cls(**kwargs)


def _build_loss(data):
    rules = []
    for i, item in enumerate(data or ()):
        if not isinstance(item, dict):
            raise ScenarioError(f"loss[{i}] must be a mapping")
        known = {f.name for f in fields(LossRule)}
        bad = set(item) - known
        if bad:
            raise ScenarioError(f"unknown key 'loss[{i}].{sorted(bad)[0]}'")
        if "src" not in item or "dst" not in item:
            raise ScenarioError(f"loss[{i}] needs 'src' and 'dst'")
        rules.append(LossRule(
            src=str(item["src"]), dst=str(item["dst"]),
            probability=float(item.get("probability", 0.0)),
            drop_seqs=tuple(int(s) for s in item.get("drop_seqs", ())),
        ))
    return tuple(rules)


def scenario_from_dict(data, scenario_id="scenario"):
    if not isinstance(data, dict):
        raise ScenarioError("scenario document must be a mapping")
    known_top = set(_SECTIONS) | {"seed", "scenario_id", "traffic", "loss"}
    for key in data:
        if key not in known_top:
            raise ScenarioError(f"unknown key '{key}'")
    sc = Scenario(
        scenario_id=str(data.get("scenario_id", scenario_id)),
        seed=int(data.get("seed", 1)),
        traffic=dict(data.get("traffic") or {"motif": "incast"}),
        loss=_build_loss(data.get("loss")),
        **{name: _build_section(cls, data.get(name), name)
           for name, cls in _SECTIONS.items()},
    )
    validate(sc)
    return sc


def load_scenario(path):
    path = Path(path)
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return scenario_from_dict(data, scenario_id=path.stem)


def validate(sc):
    t = sc.topology
    if t.tiers not in (1, 2, 3):
        raise ScenarioError("topology.tiers must be 1, 2, or 3")
    if t.radix < 2 or t.radix % 2:
        raise ScenarioError("topology.radix must be even and >= 2")
    if t.bandwidth_gbps <= 0:
        raise ScenarioError("topology.bandwidth_gbps must be positive")
    if t.mtu_bytes <= sc.transport.header_bytes:
        raise ScenarioError("topology.mtu_bytes must exceed transport.header_bytes")
    if t.per_hop_ns < 0 or t.cable_m < 0 or t.wire_ns_per_m < 0:
        raise ScenarioError("topology latency terms must be non-negative")
    tr = sc.transport
    if tr.mode not in ("go_back_n", "selective"):
        raise ScenarioError("transport.mode must be go_back_n or selective")
    if tr.timeout_us <= 0:
        raise ScenarioError("transport.timeout_us must be positive")
    if tr.reorder_limit_pkts < 1:
        raise ScenarioError("transport.reorder_limit_pkts must be >= 1")
    cc = tr.cc
    if cc.mode not in ("rate", "window"):
        raise ScenarioError("transport.cc.mode must be rate or window")
    if not 0.0 < cc.decrease_factor < 1.0:
        raise ScenarioError("transport.cc.decrease_factor must be in (0, 1)")
    if cc.increase_period_us <= 0 or cc.increase_step_gbps < 0:
        raise ScenarioError("transport.cc increase parameters out of range")
    p = sc.pfc
    if not 1 <= p.classes <= 8:
        raise ScenarioError("pfc.classes must be between 1 and 8")
    if p.enabled:
        limit = sc.buffer_bytes()
        head = sc.headroom_bytes()
        if head <= 0:
            raise ScenarioError("pfc.headroom_bytes must be positive")
        if limit <= head:
            raise ScenarioError("pfc.buffer_bytes must exceed headroom "
                                "or pause can never release")
    if sc.routing.policy not in ("ecmp", "flowlet", "spray"):
        raise ScenarioError("routing.policy must be ecmp, flowlet, or spray")
    if sc.routing.flowlet_gap_us <= 0:
        raise ScenarioError("routing.flowlet_gap_us must be positive")
    for i, rule in enumerate(sc.loss):
        if not 0.0 <= rule.probability < 1.0:
            raise ScenarioError(f"loss[{i}].probability must be in [0, 1)")
    if "motif" not in sc.traffic:
        raise ScenarioError("traffic.motif is required")
    if sc.sim.watchdog_us < 0 or sc.sim.horizon_us < 0:
        raise ScenarioError("sim timers must be non-negative")
    return sc
