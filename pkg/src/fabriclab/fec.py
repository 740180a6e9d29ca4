"""Link-reliability math: FEC error chains, go-back-n waste, FEC latency.

The error chain follows the standard random-error model for a Reed-Solomon
RS(n, k) code over m-bit symbols: per-bit errors aggregate into symbol
errors, symbol errors into uncorrectable codewords, codewords into lost
frames, and per-link frame loss into an end-to-end loss probability.

Every probability is evaluated with log1p/expm1 so that results remain
accurate at magnitudes down to (and below) 1e-30; the naive ``1 - (1-p)**n``
form loses everything below ~1e-16.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def _chain(p: float, count: int) -> float:
    """1 - (1 - p)**count, stable for tiny p."""
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0 if count > 0 else 0.0
    return -math.expm1(count * math.log1p(-p))


def _check_prob(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")


@dataclass(frozen=True)
class FecScheme:
    """An RS(n, k) code over m-bit symbols.

    ``burst_correction`` is informational only (consecutive-bit tolerance as
    advertised for the code); it plays no role in the random-error chain.
    """

    n: int
    k: int
    m: int
    burst_correction: int | None = None

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise ValueError(f"need n >= k >= 1, got n={self.n} k={self.k}")
        if self.m < 1:
            raise ValueError(f"need m >= 1, got m={self.m}")

    @property
    def t(self) -> int:
        """Number of correctable symbols per codeword."""
        return (self.n - self.k) // 2

    @property
    def wire_bits(self) -> int:
        return self.n * self.m

    @property
    def data_bits(self) -> int:
        return self.k * self.m


#: Ethernet's RS544 code: 514 data symbols + 30 parity over 10-bit symbols,
#: correcting 15 random symbol errors and up to 150 consecutive bits.
RS544 = FecScheme(n=544, k=514, m=10, burst_correction=150)


@dataclass(frozen=True)
class ErrorQuery:
    """One point on the loss chain: a link BER, a frame size, and a hop count.

    ``hops`` counts traversed links minus one (the loss exponent is hops+1).
    ``scheme`` absent means a raw link where any corrupted bit is a CRC drop.
    """

    ber_in: float
    frame_bits: int
    hops: int = 0
    scheme: FecScheme | None = None

    def __post_init__(self):
        _check_prob(self.ber_in, "ber_in")
        if self.frame_bits < 1:
            raise ValueError(f"need frame_bits >= 1, got {self.frame_bits}")
        if self.hops < 0:
            raise ValueError(f"need hops >= 0, got {self.hops}")


@dataclass(frozen=True)
class RetryLinkBudget:
    """A PCIe-style FEC + CRC + link-retry block budget."""

    block_payload_bytes: int
    fec_bytes: int
    crc_bytes: int
    post_fec_ber: float = 0.0
    retry_probability: float = 0.0
    fec_latency_ns: float = 0.0

    def __post_init__(self):
        for name in ("block_payload_bytes", "fec_bytes", "crc_bytes"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        _check_prob(self.post_fec_ber, "post_fec_ber")
        _check_prob(self.retry_probability, "retry_probability")


def symbol_error_rate(ber_in: float, m: int) -> float:
    """Probability that an m-bit FEC symbol is corrupted: 1 - (1-BER)^m."""
    _check_prob(ber_in, "ber_in")
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    return _chain(ber_in, m)


def correctable_symbols(scheme: FecScheme) -> int:
    """t = floor((n-k)/2), the per-codeword symbol correction budget."""
    return scheme.t


def codeword_error_rate(scheme: FecScheme, ser_in: float) -> float:
    """Probability a codeword has more than t corrupted symbols.

    Binomial tail sum for i = t+1 .. n, evaluated term-by-term in the log
    domain with exact integer binomial coefficients, then fsum'd.  Accurate
    to ~1e-14 relative even when the result is far below 1e-30.
    """
    _check_prob(ser_in, "ser_in")
    if ser_in == 0.0:
        return 0.0
    n, t = scheme.n, scheme.t
    if ser_in == 1.0:
        return 1.0
    log_p = math.log(ser_in)
    log_q = math.log1p(-ser_in)
    terms = [
        math.exp(math.log(math.comb(n, i)) + i * log_p + (n - i) * log_q)
        for i in range(t + 1, n + 1)
    ]
    return min(1.0, math.fsum(terms))


def frame_error_rate(cer: float, frame_bits: int, codeword_wire_bits: int) -> float:
    """Frame error rate over 1 + floor(frame/codeword) constituent codewords.

    ``codeword_wire_bits`` is the on-wire codeword size n*m (5440 for RS544);
    pass ``scheme.data_bits`` instead to probe the data-bit interpretation.
    """
    _check_prob(cer, "cer")
    if frame_bits < 1:
        raise ValueError(f"need frame_bits >= 1, got {frame_bits}")
    if codeword_wire_bits < 1:
        raise ValueError(f"need codeword_wire_bits >= 1, got {codeword_wire_bits}")
    count = 1 + frame_bits // codeword_wire_bits
    return _chain(cer, count)


def frame_loss_probability(fer: float, hops: int) -> float:
    """End-to-end frame loss over hops+1 traversed links."""
    _check_prob(fer, "fer")
    if hops < 0:
        raise ValueError(f"need hops >= 0, got {hops}")
    return _chain(fer, hops + 1)


def raw_frame_loss(ber_in: float, frame_bits: int) -> float:
    """Frame loss on a FEC-less link where any corrupted bit is a CRC drop."""
    _check_prob(ber_in, "ber_in")
    if frame_bits < 1:
        raise ValueError(f"need frame_bits >= 1, got {frame_bits}")
    return _chain(ber_in, frame_bits)


def loss_chain(query: ErrorQuery) -> dict:
    """Run the full chain for one query; returns every intermediate rate.

    With a scheme: SER -> CER -> FER -> P.  Without: raw CRC-drop model,
    where the per-link frame loss plays the FER role.
    """
    if query.scheme is None:
        fer = raw_frame_loss(query.ber_in, query.frame_bits)
        ser = cer = float("nan")
    else:
        ser = symbol_error_rate(query.ber_in, query.scheme.m)
        cer = codeword_error_rate(query.scheme, ser)
        fer = frame_error_rate(cer, query.frame_bits, query.scheme.wire_bits)
    return {
        "ser_in": ser,
        "cer": cer,
        "fer": fer,
        "loss_p": frame_loss_probability(fer, query.hops),
    }


def goback_n_waste(frame_loss_p: float, bdp_bits: float, frame_bits: int) -> float:
    """Fraction of bandwidth lost to go-back-n retransmission.

    Each lost frame discards and resends a full in-flight window, so the
    expected waste is P * BDP / frame size.
    """
    _check_prob(frame_loss_p, "frame_loss_p")
    if frame_bits < 1:
        raise ValueError(f"need frame_bits >= 1, got {frame_bits}")
    if bdp_bits < 0:
        raise ValueError(f"need bdp_bits >= 0, got {bdp_bits}")
    return frame_loss_p * bdp_bits / frame_bits


def fec_latency_ns(codeword_data_bits: int, bandwidth_bps: float, compute_ns: float) -> float:
    """FEC latency: data accumulation time plus encode/decode cost.

    The accumulation term shrinks with bandwidth; the total never goes below
    the compute cost.
    """
    if bandwidth_bps <= 0:
        raise ValueError(f"need bandwidth > 0, got {bandwidth_bps}")
    if codeword_data_bits < 0:
        raise ValueError("need codeword_data_bits >= 0")
    return codeword_data_bits / bandwidth_bps * 1e9 + compute_ns


def link_retry_overhead(budget: RetryLinkBudget) -> dict:
    """Coding overhead and retry bandwidth loss of a FEC+CRC+retry link.

    Retry loss is the upper bound of one extra block per failed block.
    """
    total = budget.block_payload_bytes + budget.fec_bytes + budget.crc_bytes
    if total <= 0:
        raise ValueError("total block bytes must be > 0")
    coding = (budget.fec_bytes + budget.crc_bytes) / total
    return {
        "coding_overhead": coding,
        "retry_bandwidth_loss": budget.retry_probability,
    }
