"""Headroom buffer sizing, RTT construction, and bandwidth-delay products.

Byte results are rounded up to the next whole byte: lossless sizing must
never under-provision.  Durations are integer picoseconds throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

from .units import PS_PER_S, ceil_div, ns_to_ps


@dataclass(frozen=True)
class LinkGeometry:
    """Physical parameters of one link.

    per_hop_latency_ns bundles arbitration, FEC, and serialization overhead
    at the hop; wire delay defaults to 5 ns/m fiber.
    """

    bandwidth_bps: int
    cable_length_m: float = 0.0
    wire_delay_ns_per_m: float = 5.0
    per_hop_latency_ns: float = 600.0
    mtu_bytes: int = 9216

    def __post_init__(self):
        if self.bandwidth_bps <= 0:
            raise ValueError(f"need bandwidth > 0, got {self.bandwidth_bps}")
        for name in ("cable_length_m", "wire_delay_ns_per_m", "per_hop_latency_ns", "mtu_bytes"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def one_way_latency_ps(self) -> int:
        return ns_to_ps(self.cable_length_m * self.wire_delay_ns_per_m + self.per_hop_latency_ns)


@dataclass(frozen=True)
class FabricShape:
    """Switch radix, PFC class count, and fabric depth."""

    ports_per_switch: int
    priority_classes: int = 8
    tiers: int = 3
    hop_count_rtt: int = 6

    def __post_init__(self):
        if not 1 <= self.priority_classes <= 8:
            raise ValueError("priority_classes must be 1..8 (3-bit PFC class field)")
        if self.ports_per_switch < 1 or self.tiers < 1:
            raise ValueError("ports and tiers must be >= 1")


def link_rtt_ps(geometry: LinkGeometry) -> int:
    """Round-trip control delay of one link: 2 * (wire + per-hop latency)."""
    return 2 * geometry.one_way_latency_ps


def fabric_rtt_ps(hop_count_rtt: int, per_hop_latency_ns: float) -> int:
    """End-to-end RTT approximated as a hop count times per-hop latency."""
    if hop_count_rtt < 1:
        raise ValueError(f"need hop_count_rtt >= 1, got {hop_count_rtt}")
    return hop_count_rtt * ns_to_ps(per_hop_latency_ns)


def bdp_bytes(bandwidth_bps: int, rtt_ps: int) -> int:
    """Bandwidth-delay product in bytes, rounded up."""
    if bandwidth_bps < 0 or rtt_ps < 0:
        raise ValueError("bandwidth and rtt must be >= 0")
    if bandwidth_bps == 0 or rtt_ps == 0:
        return 0
    return ceil_div(bandwidth_bps * rtt_ps, 8 * PS_PER_S)


def headroom_per_port_bytes(bandwidth_bps: int, rtt_ps: int, mtu_bytes: int) -> int:
    """Minimal lossless reserve for one port and class: BW*RTT + MTU."""
    if mtu_bytes < 0:
        raise ValueError("mtu must be >= 0")
    return bdp_bytes(bandwidth_bps, rtt_ps) + mtu_bytes


def switch_headroom_bytes(per_port_bytes: int, shape: FabricShape) -> int:
    """Aggregate headroom when every port reserves for every priority class."""
    if per_port_bytes < 0:
        raise ValueError("per_port_bytes must be >= 0")
    return per_port_bytes * shape.ports_per_switch * shape.priority_classes
