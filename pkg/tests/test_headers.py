"""Header budgets, packet rates, and wire efficiency."""

import pytest
from hypothesis import given, strategies as st

from fabriclab import headers


class TestHeaderBudgets:
    def test_rocev2_stack(self):
        assert headers.header_bytes(headers.PROFILES["rocev2"]) == 66

    def test_ib_local_stack(self):
        assert headers.header_bytes(headers.PROFILES["ib_local"]) == 20

    def test_stack_is_sum_of_layers(self):
        total = sum(size for _, size in headers.PROFILES["rocev2"].layers)
        assert headers.header_bytes(headers.PROFILES["rocev2"]) == total


class TestPacketRates:
    """8-byte payloads at 800 Gb/s under three framing regimes."""

    def test_headerless_ceiling(self):
        assert headers.packet_rate_pps(800e9, 8, 0) == pytest.approx(
            12.5e9, rel=1e-12)

    def test_ib_local(self):
        assert headers.packet_rate_pps(800e9, 8, 20) == pytest.approx(
            800e9 / (8 * 28), rel=1e-12)
        # two significant figures: 3.6 Gpps
        assert headers.packet_rate_pps(800e9, 8, 20) == pytest.approx(
            3.57e9, rel=5e-3)

    def test_rocev2(self):
        assert headers.packet_rate_pps(800e9, 8, 66) == pytest.approx(
            800e9 / (8 * 74), rel=1e-12)
        assert headers.packet_rate_pps(800e9, 8, 66) == pytest.approx(
            1.35e9, rel=5e-3)


class TestEfficiency:
    def test_8_byte_rocev2(self):
        assert headers.wire_efficiency(8, 66) == pytest.approx(8 / 74,
                                                               rel=1e-12)

    def test_full_mtu(self):
        assert headers.wire_efficiency(9216, 66) == pytest.approx(
            9216 / 9282, rel=1e-12)

    @given(st.integers(min_value=1, max_value=9216),
           st.integers(min_value=0, max_value=200))
    def test_efficiency_bounds(self, payload, hdr):
        e = headers.wire_efficiency(payload, hdr)
        assert 0 < e <= 1
        if hdr == 0:
            assert e == 1

    @given(st.integers(min_value=1, max_value=9216),
           st.integers(min_value=0, max_value=200),
           st.floats(min_value=1e9, max_value=2e12))
    def test_rate_times_size_is_bandwidth(self, payload, hdr, bw):
        pps = headers.packet_rate_pps(bw, payload, hdr)
        assert pps * (payload + hdr) * 8 == pytest.approx(bw, rel=1e-9)


class TestValidation:
    def test_empty_packet(self):
        with pytest.raises(ValueError):
            headers.packet_rate_pps(800e9, 0, 0)

    def test_negative_header(self):
        with pytest.raises(ValueError):
            headers.packet_rate_pps(800e9, 8, -1)
