"""Run results: per-flow records, port time series, summaries, CSV output.

Everything here is deterministic: fixed float formatting, rows in event
order, percentiles by nearest rank.  Two runs of the same scenario produce
byte-identical files.
"""

import csv
from dataclasses import dataclass, field

FLOW_COLUMNS = ("scenario_id", "flow_id", "src", "dst", "bytes", "start_ns",
                "fct_ns", "goodput_gbps", "retx_bytes", "drops")
PORT_COLUMNS = ("time_ns", "node", "port", "class", "occupancy_bytes",
                "paused", "ecn_marks", "drops")


@dataclass
class FlowResult:
    flow_id: int
    src: str
    dst: str
    bytes: int
    start_ns: float
    fct_ns: float            # completion time from flow start; <0 if unfinished
    goodput_gbps: float
    retx_bytes: int
    drops: int
    inject_done_ns: float    # last first-attempt byte on the wire; <0 if never
    first_feedback_ns: float  # first congestion notification; <0 if none
    rto_count: int
    reorder_drops: int
    dup_discards: int
    delivery_log: tuple = ()


@dataclass
class RunMetrics:
    scenario_id: str
    flows: list
    port_rows: list          # tuples matching PORT_COLUMNS
    pause_log: list          # (time_ns, node, port, class, paused)
    counters: dict
    derived: dict = field(default_factory=dict)

    @property
    def completed(self):
        return sum(1 for f in self.flows if f.fct_ns >= 0)


def _ns(ps):
    return ps / 1000.0


def package_results(sc, topo, res):
    """Convert raw kernel output into a RunMetrics with node names."""
    names = topo.names
    flows = []
    for f in res["flows"]:
        fct_ps = f.end_ps - f.start_ps if f.end_ps >= 0 else -1
        goodput = f.total_bytes * 8.0 / fct_ps * 1000.0 if fct_ps > 0 else 0.0
        flows.append(FlowResult(
            flow_id=f.fid,
            src=names[f.src],
            dst=names[f.dst],
            bytes=f.total_bytes,
            start_ns=_ns(f.start_ps) if f.start_ps >= 0 else -1.0,
            fct_ns=_ns(fct_ps) if fct_ps >= 0 else -1.0,
            goodput_gbps=goodput,
            retx_bytes=f.retx_bytes,
            drops=f.drops,
            inject_done_ns=_ns(f.inject_done_ps) if f.inject_done_ps >= 0 else -1.0,
            first_feedback_ns=(_ns(f.first_feedback_ps)
                               if f.first_feedback_ps >= 0 else -1.0),
            rto_count=f.rto_count,
            reorder_drops=f.reorder_drops,
            dup_discards=f.dup_discards,
            delivery_log=tuple(f.delivery_log) if f.delivery_log else (),
        ))
    port_rows = [
        (_ns(t), names[node], pid, cls, occ, paused, marks, drops)
        for (t, node, pid, cls, occ, paused, marks, drops) in res["port_rows"]
    ]
    pause_log = [
        (_ns(t), pid, cls, on) for (t, pid, cls, on) in res["pause_log"]
    ]
    counters = {
        "sim_time_ns": _ns(res["sim_time_ps"]),
        "events": res["events"],
        "total_drops": res["total_drops"],
        "pause_frames": res["pause_frames"],
        "resume_frames": res["resume_frames"],
        "peak_occupancy_bytes": res["peak_occupancy"],
        "max_paused_tiers": res["max_paused_tiers"],
        "first_pause_ns_by_tier": tuple(
            _ns(t) if t >= 0 else -1.0 for t in res["first_pause_ps"]),
        "delivered_bytes": res["delivered_bytes"],
    }
    derived = {
        "headroom_bytes": sc.headroom_bytes() if sc.pfc.enabled else 0,
        "buffer_bytes": sc.buffer_bytes(),
        "ecn_threshold_bytes": sc.ecn_threshold_bytes(),
        "window_bytes": sc.window_bytes(),
        "link_rtt_ns": sc.link_rtt_ps() / 1000.0,
        "fabric_rtt_ns": sc.fabric_rtt_ps() / 1000.0,
        "bdp_bytes": sc.bdp_bytes(),
    }
    return RunMetrics(
        scenario_id=sc.scenario_id,
        flows=flows,
        port_rows=port_rows,
        pause_log=pause_log,
        counters=counters,
        derived=derived,
    )


def write_flows_csv(metrics, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FLOW_COLUMNS)
        for f in metrics.flows:
            w.writerow((
                metrics.scenario_id, f.flow_id, f.src, f.dst, f.bytes,
                f"{f.start_ns:.3f}", f"{f.fct_ns:.3f}",
                f"{f.goodput_gbps:.6f}", f.retx_bytes, f.drops,
            ))


def write_ports_csv(metrics, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PORT_COLUMNS)
        for (t, node, pid, cls, occ, paused, marks, drops) in metrics.port_rows:
            w.writerow((f"{t:.3f}", node, pid, cls, occ, paused, marks, drops))


def percentile_nearest_rank(values, pct):
    """Nearest-rank percentile; pct in (0, 100]."""
    if not values:
        raise ValueError("no values")
    if not 0 < pct <= 100:
        raise ValueError("pct must be in (0, 100]")
    ordered = sorted(values)
    rank = -(-len(ordered) * pct // 100)  # ceil
    return ordered[int(rank) - 1]


def summarize(metrics):
    done = [f for f in metrics.flows if f.fct_ns >= 0]
    out = {
        "scenario_id": metrics.scenario_id,
        "flows": len(metrics.flows),
        "completed": len(done),
        "total_retx_bytes": sum(f.retx_bytes for f in metrics.flows),
        "total_drops": metrics.counters["total_drops"],
        "pause_frames": metrics.counters["pause_frames"],
        "peak_occupancy_bytes": metrics.counters["peak_occupancy_bytes"],
        "max_paused_tiers": metrics.counters["max_paused_tiers"],
        "sim_time_ns": metrics.counters["sim_time_ns"],
        "events": metrics.counters["events"],
    }
    if done:
        fcts = [f.fct_ns for f in done]
        out["p50_fct_ns"] = percentile_nearest_rank(fcts, 50)
        out["p99_fct_ns"] = percentile_nearest_rank(fcts, 99)
        out["max_fct_ns"] = max(fcts)
        start = min(f.start_ns for f in done)
        end = max(f.start_ns + f.fct_ns for f in done)
        span = end - start
        total_bits = sum(f.bytes for f in done) * 8.0
        out["agg_goodput_gbps"] = total_bits / span if span > 0 else 0.0
    else:
        out["p50_fct_ns"] = out["p99_fct_ns"] = out["max_fct_ns"] = -1.0
        out["agg_goodput_gbps"] = 0.0
    return out
