"""Header-stack accounting: per-packet overhead, packet rates, efficiency.

Physical-layer preamble/IPG overheads are deliberately excluded; an 800 Gb/s
link moving 8-byte payloads with no headers is exactly 12.5 Gpps only
without them.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class HeaderStack:
    """An ordered set of named header layers with byte sizes."""

    layers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for name, size in self.layers:
            if size < 0:
                raise ValueError(f"layer {name!r} has negative size {size}")

    @property
    def total_bytes(self) -> int:
        return sum(size for _, size in self.layers)


ROCEV2 = HeaderStack((("l2", 22), ("ip", 20), ("udp", 8), ("bth", 12), ("icrc", 4)))
IB_LOCAL = HeaderStack((("lrh", 8), ("bth", 12)))

PROFILES = {"rocev2": ROCEV2, "ib_local": IB_LOCAL}


def header_bytes(stack: HeaderStack) -> int:
    return stack.total_bytes


def packet_rate_pps(bandwidth_bps: float, payload_bytes: int, header_bytes: int) -> float:
    """Packets per second at full line rate for a given packet size."""
    size = payload_bytes + header_bytes
    if size <= 0:
        raise ValueError("payload + header must be > 0")
    if payload_bytes < 0 or header_bytes < 0:
        raise ValueError("sizes must be >= 0")
    return bandwidth_bps / (8 * size)


def wire_efficiency(payload_bytes: int, header_bytes: int) -> float:
    """Fraction of wire bytes that are payload."""
    size = payload_bytes + header_bytes
    if size <= 0:
        raise ValueError("payload + header must be > 0")
    if payload_bytes < 0 or header_bytes < 0:
        raise ValueError("sizes must be >= 0")
    return payload_bytes / size
