"""fabriclab: datacenter Ethernet/RDMA performance models and fabric simulator."""

__version__ = "0.1.0"

from .budget import (  # noqa: F401
    FabricShape,
    LinkGeometry,
    bdp_bytes,
    fabric_rtt_ps,
    headroom_per_port_bytes,
    link_rtt_ps,
    switch_headroom_bytes,
)
from .fec import (  # noqa: F401
    RS544,
    ErrorQuery,
    FecScheme,
    RetryLinkBudget,
    codeword_error_rate,
    correctable_symbols,
    fec_latency_ns,
    frame_error_rate,
    frame_loss_probability,
    goback_n_waste,
    link_retry_overhead,
    loss_chain,
    raw_frame_loss,
    symbol_error_rate,
)
from .headers import (  # noqa: F401
    IB_LOCAL,
    PROFILES,
    ROCEV2,
    HeaderStack,
    header_bytes,
    packet_rate_pps,
    wire_efficiency,
)
