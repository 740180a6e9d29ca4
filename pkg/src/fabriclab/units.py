"""Unit conversion helpers.

All simulator and sizing arithmetic runs on integer picoseconds and integer
bits-per-second so that repeated runs cannot drift; conversion to and from
human units (ns, us, Gb/s) happens only at the edges.
"""

from __future__ import annotations

PS_PER_NS = 1_000
PS_PER_US = 1_000_000
PS_PER_S = 1_000_000_000_000


def ns_to_ps(ns: float) -> int:
    return round(ns * PS_PER_NS)


def us_to_ps(us: float) -> int:
    return round(us * PS_PER_US)


def ps_to_ns(ps: int) -> float:
    return ps / PS_PER_NS


def gbps_to_bps(gbps: float) -> int:
    return round(gbps * 1e9)


def bps_to_gbps(bps: float) -> float:
    return bps / 1e9


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def tx_time_ps(wire_bytes: int, bandwidth_bps: int) -> int:
    """Serialization time of a frame, rounded up to the next picosecond."""
    return ceil_div(wire_bytes * 8 * PS_PER_S, bandwidth_bps)
