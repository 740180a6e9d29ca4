"""Flow-schedule generators for the guiding traffic motifs.

A schedule is a list of FlowSpec plus a list of dependency groups.  Flows in
group g are released when group ``prereq`` has fully completed plus an
optional compute delay; group -1 means released at the schedule start.
Everything is a pure function of (spec, seed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .units import us_to_ps


@dataclass(frozen=True)
class FlowSpec:
    flow_id: int
    src: int          # endpoint index
    dst: int
    bytes: int
    priority_class: int = 0
    start_offset_ps: int = 0     # offset within the group release
    group: int = 0
    max_rate_bps: int | None = None   # optional source-side pacing cap


@dataclass(frozen=True)
class Group:
    group_id: int
    prereq: int      # -1 = none
    compute_ps: int = 0


@dataclass
class Schedule:
    flows: list[FlowSpec] = field(default_factory=list)
    groups: list[Group] = field(default_factory=list)

    @property
    def total_bytes(self) -> int:
        return sum(f.bytes for f in self.flows)


def _check_counts(**kwargs):
    for name, value in kwargs.items():
        if value < 0:
            raise ValueError(f"{name} must be >= 0, got {value}")


def gen_incast(
    sources: int,
    transaction_bytes: int,
    start_jitter_us: float = 0.0,
    *,
    hosts: int,
    dst: int = 0,
    priority_class: int = 0,
    seed: int = 0,
) -> Schedule:
    """N uncoordinated senders, one destination, one transaction each.

    Source processes are assigned round-robin over every host except the
    destination; start times are uniform in [0, jitter] from the seeded
    generator.
    """
    _check_counts(sources=sources, transaction_bytes=transaction_bytes)
    if transaction_bytes < 1:
        raise ValueError("transaction_bytes must be >= 1")
    if hosts < 2:
        raise ValueError("incast needs at least 2 hosts")
    if not 0 <= dst < hosts:
        raise ValueError(f"dst {dst} outside host range")
    rng = random.Random(seed)
    jitter_ps = us_to_ps(start_jitter_us)
    others = [h for h in range(hosts) if h != dst]
    flows = []
    for i in range(sources):
        src = others[i % len(others)]
        offset = rng.randrange(jitter_ps + 1) if jitter_ps else 0
        flows.append(
            FlowSpec(flow_id=i, src=src, dst=dst, bytes=transaction_bytes,
                     priority_class=priority_class, start_offset_ps=offset, group=0)
        )
    return Schedule(flows=flows, groups=[Group(0, -1)])


def _sattolo(items: list[int], rng: random.Random) -> list[int]:
    """Seeded cyclic permutation: no element maps to itself."""
    perm = list(items)
    for i in range(len(perm) - 1, 0, -1):
        j = rng.randrange(i)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def gen_obs(
    processes: int,
    steps: int,
    bytes_per_peer: int,
    compute_us: float = 0.0,
    pattern: str = "permutation",
    *,
    priority_class: int = 0,
    seed: int = 0,
) -> Schedule:
    """Bulk-synchronous phases: compute, then a global communication step.

    ``permutation`` draws a seeded fixed-point-free permutation per step, so
    every endpoint receives from exactly one peer (incast-free by
    construction).  ``all_to_all`` sends p*(p-1) flows per step.  A step
    starts only after every flow of the previous step has completed.
    """
    _check_counts(processes=processes, steps=steps, bytes_per_peer=bytes_per_peer)
    if steps and processes < 2:
        raise ValueError("communication steps need processes >= 2")
    if pattern not in ("permutation", "all_to_all"):
        raise ValueError(f"unknown OBS pattern {pattern!r}")
    rng = random.Random(seed)
    compute_ps = us_to_ps(compute_us)
    flows: list[FlowSpec] = []
    groups: list[Group] = []
    fid = 0
    for step in range(steps):
        groups.append(Group(step, step - 1, compute_ps))
        if pattern == "permutation":
            perm = _sattolo(list(range(processes)), rng)
            pairs = [(p, perm[p]) for p in range(processes)]
        else:
            pairs = [(p, q) for p in range(processes) for q in range(processes) if p != q]
        for src, dst in pairs:
            flows.append(
                FlowSpec(flow_id=fid, src=src, dst=dst, bytes=bytes_per_peer,
                         priority_class=priority_class, group=step)
            )
            fid += 1
    return Schedule(flows=flows, groups=groups)


def gen_ls_chain(
    depth: int,
    message_bytes: int,
    *,
    src: int = 0,
    dst: int = 1,
    priority_class: int = 0,
) -> Schedule:
    """A dependent request/response chain on the critical path.

    Message i+1 is released only when response i has been delivered, so
    completion time is bounded below by depth * end-to-end RTT.
    """
    _check_counts(depth=depth)
    if depth and message_bytes < 1:
        raise ValueError("message_bytes must be >= 1")
    if depth and src == dst:
        raise ValueError("src and dst must differ")
    flows: list[FlowSpec] = []
    groups: list[Group] = []
    for i in range(depth):
        req_g, resp_g = 2 * i, 2 * i + 1
        groups.append(Group(req_g, req_g - 1))
        groups.append(Group(resp_g, req_g))
        flows.append(FlowSpec(flow_id=2 * i, src=src, dst=dst, bytes=message_bytes,
                              priority_class=priority_class, group=req_g))
        flows.append(FlowSpec(flow_id=2 * i + 1, src=dst, dst=src, bytes=message_bytes,
                              priority_class=priority_class, group=resp_g))
    return Schedule(flows=flows, groups=groups)


def gen_custom(flow_dicts: list[dict], *, hosts: int) -> Schedule:
    """Explicit flow list: src, dst, bytes plus optional class/start/rate."""
    flows = []
    for i, d in enumerate(flow_dicts):
        src, dst = int(d["src"]), int(d["dst"])
        if not (0 <= src < hosts and 0 <= dst < hosts):
            raise ValueError(f"flow {i}: endpoint outside host range 0..{hosts - 1}")
        if src == dst:
            raise ValueError(f"flow {i}: src == dst")
        rate = d.get("max_rate_gbps")
        flows.append(
            FlowSpec(
                flow_id=i, src=src, dst=dst, bytes=int(d["bytes"]),
                priority_class=int(d.get("class", 0)),
                start_offset_ps=us_to_ps(float(d.get("start_us", 0.0))),
                group=0,
                max_rate_bps=round(float(rate) * 1e9) if rate else None,
            )
        )
    return Schedule(flows=flows, groups=[Group(0, -1)])
