"""Builds kernel inputs from a scenario and runs them.

The event kernel exists twice: ``_kernel`` is plain Python and always
importable; ``_kernel_c`` is the same source compiled as an extension when
the build machine had a C toolchain.  Both are generated from one file, so
results are bit-identical; set FABRICLAB_PURE=1 to force the interpreter
version.
"""

import os

from .. import motifs
from ..units import PS_PER_S, us_to_ps
from .scenario import Scenario, ScenarioError
from .topology import build_fat_tree

from . import _kernel as _pure

try:
    if os.environ.get("FABRICLAB_PURE"):
        raise ImportError("forced pure backend")
    from . import _kernel_c as _impl
    _BACKEND = "compiled"
except ImportError:
    _impl = _pure
    _BACKEND = "pure"

DeadlockError = _pure.DeadlockError

_TRANSPORT = {"go_back_n": _pure.GBN, "selective": _pure.SACK}
_CC = {"rate": _pure.CC_RATE, "window": _pure.CC_WINDOW}
_POLICY = {"ecmp": _pure.ECMP, "flowlet": _pure.FLOWLET, "spray": _pure.SPRAY}


def kernel_backend():
    return _BACKEND


def _backend_mod():
    return _pure if os.environ.get("FABRICLAB_PURE") else _impl


def build_schedule(sc, topo):
    """Expand the traffic section into a flow schedule."""
    traffic = dict(sc.traffic)
    motif = traffic.pop("motif", None)
    hosts = topo.host_count
    try:
        if motif == "incast":
            return motifs.gen_incast(
                sources=int(traffic.pop("sources", hosts - 1)),
                transaction_bytes=int(traffic.pop("transaction_bytes", 10240)),
                start_jitter_us=float(traffic.pop("start_jitter_us", 0.0)),
                hosts=hosts,
                dst=int(traffic.pop("dst", 0)),
                priority_class=int(traffic.pop("priority_class", 0)),
                seed=sc.seed,
            )
        if motif == "obs":
            return motifs.gen_obs(
                processes=int(traffic.pop("processes", hosts)),
                steps=int(traffic.pop("steps", 1)),
                bytes_per_peer=int(traffic.pop("bytes_per_peer", 65536)),
                compute_us=float(traffic.pop("compute_us", 0.0)),
                pattern=str(traffic.pop("pattern", "permutation")),
                priority_class=int(traffic.pop("priority_class", 0)),
                seed=sc.seed,
            )
        if motif == "ls_chain":
            return motifs.gen_ls_chain(
                depth=int(traffic.pop("depth", 4)),
                message_bytes=int(traffic.pop("message_bytes", 4096)),
                src=int(traffic.pop("src", 0)),
                dst=int(traffic.pop("dst", 1)),
                priority_class=int(traffic.pop("priority_class", 0)),
            )
        if motif == "custom":
            return motifs.gen_custom(traffic.pop("flows", ()), hosts=hosts)
    except ValueError as exc:
        raise ScenarioError(f"traffic: {exc}") from exc
    raise ScenarioError(f"unknown traffic.motif '{motif}'")


def build_kernel_config(sc, schedule=None, record_delivery=False):
    topo = build_fat_tree(sc.topology.tiers, sc.topology.radix)
    if schedule is None:
        _check_traffic_keys(sc.traffic)
        schedule = build_schedule(sc, topo)

    geom = sc.link_geometry()
    bw = geom.bandwidth_bps
    lat_ps = geom.one_way_latency_ps

    # ports: one per directed link end
    port_node, port_peer, port_bw, port_lat = [], [], [], []
    port_of = {}
    for a, b in topo.links:
        pa = len(port_node)
        port_node.append(a)
        port_bw.append(bw)
        port_lat.append(lat_ps)
        pb = len(port_node)
        port_node.append(b)
        port_bw.append(bw)
        port_lat.append(lat_ps)
        port_peer.extend((pb, pa))
        port_of[(a, b)] = pa
        port_of[(b, a)] = pb

    n_nodes = topo.n_nodes
    host_port = [-1] * n_nodes
    for h in range(topo.host_count):
        host_port[h] = port_of[(h, topo.host_attach[h])]

    down_port = [dict() for _ in range(n_nodes)]
    up_ports = [() for _ in range(n_nodes)]
    for node, table in topo.down_route.items():
        down_port[node] = {dst: port_of[(node, nbr)] for dst, nbr in table.items()}
    for node, ups in topo.up_nodes.items():
        up_ports[node] = tuple(port_of[(node, u)] for u in ups)
    for h in range(topo.host_count):
        up_ports[h] = (host_port[h],)

    header = sc.transport.header_bytes
    full_payload = sc.topology.mtu_bytes - header
    classes = sc.pfc.classes

    K = _backend_mod()
    flows = []
    for spec in schedule.flows:
        if not 0 <= spec.src < topo.host_count or not 0 <= spec.dst < topo.host_count:
            raise ScenarioError(f"flow {spec.flow_id}: host out of range")
        if spec.src == spec.dst:
            raise ScenarioError(f"flow {spec.flow_id}: src == dst")
        if spec.bytes <= 0:
            raise ScenarioError(f"flow {spec.flow_id}: bytes must be positive")
        if not 0 <= spec.priority_class < classes:
            raise ScenarioError(
                f"flow {spec.flow_id}: priority_class {spec.priority_class} "
                f"outside configured {classes} classes")
        flows.append(K.Flow(
            fid=spec.flow_id, src=spec.src, dst=spec.dst,
            total_bytes=spec.bytes, cls=spec.priority_class, group=spec.group,
            start_offset_ps=spec.start_offset_ps,
            max_rate_bps=spec.max_rate_bps or 0,
            full_payload=full_payload, header=header,
        ))

    groups = schedule.groups
    n_groups = len(groups)
    group_prereq = [g.prereq for g in groups]
    group_compute = [g.compute_ps for g in groups]
    group_members = [[] for _ in range(n_groups)]
    for f in flows:
        if not 0 <= f.group < n_groups:
            raise ScenarioError(f"flow {f.fid}: group {f.group} undefined")
        group_members[f.group].append(f.fid)
    group_children = [[] for _ in range(n_groups)]
    for g in groups:
        if g.prereq >= 0:
            if g.prereq >= g.group_id:
                raise ScenarioError("group prerequisites must form a forward chain")
            group_children[g.prereq].append(g.group_id)
    for g in range(n_groups):
        if not group_members[g] and group_prereq[g] != -2:
            # empty groups would never release their children
            if group_children[g]:
                raise ScenarioError(f"group {g} has dependents but no flows")

    loss_prob = [0.0] * len(port_node)
    loss_seqs = [None] * len(port_node)
    name_to_node = {n: i for i, n in enumerate(topo.names)}
    for rule in sc.loss:
        if rule.src not in name_to_node or rule.dst not in name_to_node:
            raise ScenarioError(f"loss rule names unknown node "
                                f"'{rule.src}'/'{rule.dst}'")
        key = (name_to_node[rule.src], name_to_node[rule.dst])
        if key not in port_of:
            raise ScenarioError(f"loss rule {rule.src}->{rule.dst}: "
                                "nodes are not adjacent")
        pid = port_of[key]
        loss_prob[pid] = rule.probability
        if rule.drop_seqs:
            loss_seqs[pid] = set(rule.drop_seqs)

    limit = sc.buffer_bytes()
    headroom = sc.headroom_bytes()
    cc = sc.transport.cc
    period_ps = us_to_ps(cc.increase_period_us)
    step_bps = int(cc.increase_step_gbps * 1e9)
    cfg = {
        "node_tier": [topo.node_tier[i] for i in range(n_nodes)],
        "node_is_host": [1 if i < topo.host_count else 0 for i in range(n_nodes)],
        "port_node": port_node, "port_peer": port_peer,
        "port_bw": port_bw, "port_lat": port_lat,
        "host_port": host_port, "down_port": down_port, "up_ports": up_ports,
        "classes": classes,
        "limit_bytes": limit,
        "headroom_bytes": headroom if sc.pfc.enabled else 0,
        "xon_level": max(1, (limit - headroom) // 2) if sc.pfc.enabled else 0,
        "pfc_on": 1 if sc.pfc.enabled else 0,
        "ecn_thresh": sc.ecn_threshold_bytes(),
        "policy": _POLICY[sc.routing.policy],
        "flowlet_gap_ps": us_to_ps(sc.routing.flowlet_gap_us),
        "seed": sc.seed,
        "transport": _TRANSPORT[sc.transport.mode],
        "cc_mode": _CC[cc.mode],
        "cc_factor": cc.decrease_factor,
        "cc_period_ps": period_ps,
        "cc_step_bps": step_bps,
        "cc_step_bytes": max(1, step_bps * period_ps // (8 * PS_PER_S)),
        "cc_min_rate_bps": int(cc.min_rate_gbps * 1e9),
        "cc_min_window": sc.topology.mtu_bytes,
        "init_window": sc.window_bytes(),
        "timeout_ps": us_to_ps(sc.transport.timeout_us),
        "nack_guard_ps": sc.nack_guard_ps(),
        "cnp_epoch_ps": sc.fabric_rtt_ps(),
        "ctrl_bytes": header,
        "reorder_limit": sc.transport.reorder_limit_pkts,
        "sample_ps": us_to_ps(sc.sim.sample_interval_us),
        "watchdog_ps": us_to_ps(sc.sim.watchdog_us),
        "horizon_ps": us_to_ps(sc.sim.horizon_us),
        "flows": flows,
        "group_prereq": group_prereq,
        "group_compute_ps": group_compute,
        "group_members": group_members,
        "group_children": group_children,
        "loss_prob": loss_prob,
        "loss_seqs": loss_seqs,
        "record_delivery": record_delivery,
    }
    return K, cfg, topo


def _check_traffic_keys(traffic):
    allowed = {
        "incast": {"motif", "sources", "transaction_bytes", "start_jitter_us",
                   "dst", "priority_class"},
        "obs": {"motif", "processes", "steps", "bytes_per_peer", "compute_us",
                "pattern", "priority_class"},
        "ls_chain": {"motif", "depth", "message_bytes", "src", "dst",
                     "priority_class"},
        "custom": {"motif", "flows"},
    }
    motif = traffic.get("motif")
    keys = allowed.get(motif)
    if keys is None:
        raise ScenarioError(f"unknown traffic.motif '{motif}'")
    bad = set(traffic) - keys
    if bad:
        raise ScenarioError(f"unknown key 'traffic.{sorted(bad)[0]}'")


def run_scenario(sc, schedule=None, record_delivery=False):
    """Run one scenario to completion; returns a RunMetrics."""
    from ..metrics import package_results

    K, cfg, topo = build_kernel_config(sc, schedule, record_delivery)
    kern = K.Kernel(cfg)
    try:
        res = kern.run()
    except K.DeadlockError as exc:
        if K is _pure:
            raise
        # the compiled module defines its own exception class; re-raise as
        # the one public type
        raise DeadlockError(exc.report) from None
    return package_results(sc, topo, res)
