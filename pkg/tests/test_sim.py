"""End-to-end simulator behavior on small fabrics.

Each test builds a scenario dict inline, runs it, and checks the mechanism
under test through the public metrics. All fabrics here are tiny (2 to 8
hosts) so the whole module runs in seconds.
"""

import pytest

from fabriclab import motifs
from fabriclab.metrics import write_flows_csv, write_ports_csv
from fabriclab.sim import DeadlockError, run_scenario, scenario_from_dict
from fabriclab.sim.engine import kernel_backend
from fabriclab.sim.scenario import ScenarioError

MTU, HDR = 9216, 66
PAYLOAD = MTU - HDR   # 9150


def make(data, sid="t"):
    return scenario_from_dict(data, scenario_id=sid)


def one_flow(nbytes, *, transport="go_back_n", loss=(), timeout_us=500.0,
             watchdog_us=50000.0, extra=None):
    d = {
        "seed": 3,
        "topology": {"tiers": 1, "radix": 4},
        "transport": {"mode": transport, "timeout_us": timeout_us},
        "traffic": {"motif": "custom",
                    "flows": [{"src": 1, "dst": 0, "bytes": nbytes}]},
        "sim": {"watchdog_us": watchdog_us},
    }
    if loss:
        d["loss"] = list(loss)
    for k, v in (extra or {}).items():
        d.setdefault(k, {}).update(v)
    return make(d)


class TestCleanDelivery:
    def test_single_flow_completes(self):
        m = run_scenario(one_flow(10 * PAYLOAD))
        assert m.completed == 1
        f = m.flows[0]
        assert (f.retx_bytes, f.drops) == (0, 0)
        assert m.counters["total_drops"] == 0
        assert m.counters["delivered_bytes"] == 10 * PAYLOAD
        assert 0 < f.goodput_gbps < 800

    def test_fct_at_least_wire_time(self):
        m = run_scenario(one_flow(10 * PAYLOAD))
        # 10 MTU frames through the first link plus two 600 ns hops
        wire_ns = 10 * MTU * 8 / 800e9 * 1e9
        assert m.flows[0].fct_ns >= wire_ns + 1200

    def test_delivery_order(self):
        for mode in ("go_back_n", "selective"):
            m = run_scenario(one_flow(20 * PAYLOAD, transport=mode),
                             record_delivery=True)
            assert m.flows[0].delivery_log == tuple(range(20))

    @pytest.mark.parametrize("policy", ["ecmp", "flowlet", "spray"])
    def test_multipath_policies_lossless(self, policy):
        m = run_scenario(make({
            "seed": 11,
            "topology": {"tiers": 2, "radix": 4},
            "routing": {"policy": policy},
            "traffic": {"motif": "incast", "sources": 7,
                        "transaction_bytes": 200_000},
        }))
        assert m.completed == 7
        assert m.counters["total_drops"] == 0

    def test_all_to_all_pattern(self):
        m = run_scenario(make({
            "topology": {"tiers": 1, "radix": 8},
            "traffic": {"motif": "obs", "pattern": "all_to_all",
                        "bytes_per_peer": 50_000},
        }))
        assert m.completed == 4 * 3
        assert m.counters["total_drops"] == 0


class TestPfc:
    def hot_incast(self, **over):
        d = {
            "seed": 2,
            "topology": {"tiers": 1, "radix": 8},
            "ecn": {"enabled": False},
            "traffic": {"motif": "incast", "sources": 3,
                        "transaction_bytes": 2_000_000},
        }
        for k, v in over.items():
            d.setdefault(k, {}).update(v)
        return make(d)

    def test_pause_resume_keeps_lossless(self):
        m = run_scenario(self.hot_incast())
        assert m.counters["pause_frames"] > 0
        assert m.counters["resume_frames"] > 0
        assert m.counters["total_drops"] == 0
        assert m.completed == 3

    def test_pause_log_alternates(self):
        m = run_scenario(self.hot_incast())
        state = {}
        for _, pid, cls, on in m.pause_log:
            assert state.get((pid, cls), 0) != on
            state[(pid, cls)] = on

    def test_occupancy_capped_at_buffer(self):
        sc = self.hot_incast()
        m = run_scenario(sc)
        assert 0 < m.counters["peak_occupancy_bytes"] <= sc.buffer_bytes()

    def test_only_host_tier_pauses_on_single_switch(self):
        m = run_scenario(self.hot_incast())
        assert m.counters["max_paused_tiers"] == 1
        by_tier = m.counters["first_pause_ns_by_tier"]
        assert by_tier[0] >= 0                   # sender host egresses
        assert all(t < 0 for t in by_tier[1:])   # no switch tier paused

    def test_disabled_pfc_overflows(self):
        m = run_scenario(self.hot_incast(
            pfc={"enabled": False, "buffer_bytes": 50_000},
            transport={"mode": "selective"},
            traffic={"transaction_bytes": 200_000}))
        assert m.counters["total_drops"] > 0
        assert m.counters["pause_frames"] == 0
        assert m.completed == 3   # transport recovers the losses


class TestEcn:
    def congested(self, enabled):
        return make({
            "seed": 4,
            "topology": {"tiers": 1, "radix": 8},
            "ecn": {"enabled": enabled, "threshold_bytes": 20_000},
            "traffic": {"motif": "incast", "sources": 3,
                        "transaction_bytes": 1_000_000},
        })

    def test_marks_produce_feedback(self):
        m = run_scenario(self.congested(True))
        assert all(f.first_feedback_ns >= 0 for f in m.flows)
        assert any(row[6] > 0 for row in m.port_rows)   # ecn_marks column

    def test_disabled_means_no_feedback(self):
        m = run_scenario(self.congested(False))
        assert all(f.first_feedback_ns < 0 for f in m.flows)
        assert all(row[6] == 0 for row in m.port_rows)

    def test_feedback_slows_completion(self):
        fast = run_scenario(self.congested(False)).flows[0].fct_ns
        slow = run_scenario(self.congested(True)).flows[0].fct_ns
        assert slow > fast


class TestLossRecovery:
    LOSS5 = ({"src": "h1", "dst": "e0", "drop_seqs": [5]},)

    def test_gbn_rewinds(self):
        m = run_scenario(one_flow(40 * PAYLOAD, loss=self.LOSS5))
        f = m.flows[0]
        assert m.completed == 1
        assert f.drops == 1
        # go-back-n resends the lost frame plus everything after it in flight
        assert f.retx_bytes >= MTU

    def test_sack_resends_exactly_one(self):
        m = run_scenario(one_flow(40 * PAYLOAD, transport="selective",
                                  loss=self.LOSS5))
        f = m.flows[0]
        assert m.completed == 1
        assert f.drops == 1
        assert f.retx_bytes == MTU

    @pytest.mark.parametrize("mode", ["go_back_n", "selective"])
    def test_tail_loss_needs_rto(self, mode):
        m = run_scenario(one_flow(
            2 * PAYLOAD, transport=mode, timeout_us=200.0,
            loss=({"src": "h1", "dst": "e0", "drop_seqs": [1]},)))
        f = m.flows[0]
        assert m.completed == 1
        assert f.rto_count >= 1
        assert f.fct_ns >= 200_000

    def test_reorder_limit_overflow(self):
        m = run_scenario(one_flow(
            30 * PAYLOAD, transport="selective", timeout_us=200.0,
            loss=({"src": "h1", "dst": "e0", "drop_seqs": [2]},),
            extra={"transport": {"reorder_limit_pkts": 2}}))
        f = m.flows[0]
        assert m.completed == 1
        assert f.reorder_drops >= 1

    def test_bernoulli_loss_reproducible(self):
        sc = one_flow(50 * PAYLOAD, transport="selective",
                      loss=({"src": "h1", "dst": "e0", "probability": 0.2},))
        a, b = run_scenario(sc), run_scenario(sc)
        assert a.flows[0].drops == b.flows[0].drops > 0
        assert a.flows[0].retx_bytes == b.flows[0].retx_bytes
        assert a.flows[0].fct_ns == b.flows[0].fct_ns


class TestDeadlock:
    def wedge(self):
        # drop the tail frame with retransmission timers far beyond the
        # watchdog: delivery stalls and the run must abort with a report
        return one_flow(2 * PAYLOAD, transport="selective",
                        timeout_us=100_000.0, watchdog_us=1_000.0,
                        loss=({"src": "h1", "dst": "e0", "drop_seqs": [1]},))

    def test_watchdog_aborts_with_report(self):
        with pytest.raises(DeadlockError) as ei:
            run_scenario(self.wedge())
        rep = ei.value.report
        assert rep["incomplete_flows"] == [0]
        assert rep["delivered_bytes"] == PAYLOAD
        assert rep["time_ps"] > 0
        assert "paused_egress_ports" in rep

    def test_horizon_returns_partial(self):
        sc = one_flow(9000 * PAYLOAD, extra={"sim": {"horizon_us": 10.0}})
        m = run_scenario(sc)
        assert m.completed == 0
        assert m.flows[0].fct_ns == -1.0
        assert m.counters["sim_time_ns"] <= 10_000


class TestDependencies:
    def test_obs_step_barrier(self):
        m = run_scenario(make({
            "topology": {"tiers": 1, "radix": 8},
            "traffic": {"motif": "obs", "steps": 2, "compute_us": 5.0,
                        "bytes_per_peer": 10 * PAYLOAD},
        }))
        assert m.completed == 8
        step0 = [f for f in m.flows if f.flow_id < 4]
        step1 = [f for f in m.flows if f.flow_id >= 4]
        barrier = max(f.start_ns + f.fct_ns for f in step0)
        assert min(f.start_ns for f in step1) >= barrier + 5_000

    def test_ls_chain_serializes(self):
        m = run_scenario(make({
            "topology": {"tiers": 1, "radix": 4},
            "traffic": {"motif": "ls_chain", "depth": 3,
                        "message_bytes": 4096},
        }))
        assert m.completed == 6
        order = sorted(m.flows, key=lambda f: f.flow_id)
        for prev, nxt in zip(order, order[1:]):
            # picosecond-exact handoff; the ns floats may differ in the ulp
            assert nxt.start_ns >= prev.start_ns + prev.fct_ns - 1e-6


class TestPacing:
    def test_max_rate_cap(self):
        sc = make({
            "topology": {"tiers": 1, "radix": 4},
            "traffic": {"motif": "custom",
                        "flows": [{"src": 1, "dst": 0, "bytes": 1_000_000,
                                   "max_rate_gbps": 100}]},
        })
        f = run_scenario(sc).flows[0]
        assert f.goodput_gbps <= 101
        assert f.fct_ns >= 1_000_000 * 8 / 100e9 * 1e9

    def test_window_mode_stop_and_wait(self):
        # a one-MTU window degenerates to stop-and-wait: ten frames cost
        # at least nine fabric round trips
        sc = make({
            "topology": {"tiers": 1, "radix": 4},
            "transport": {"window_bytes": MTU,
                          "cc": {"mode": "window",
                                 "increase_period_us": 1e6}},
            "traffic": {"motif": "custom",
                        "flows": [{"src": 1, "dst": 0,
                                   "bytes": 10 * PAYLOAD}]},
        })
        f = run_scenario(sc).flows[0]
        assert f.fct_ns >= 9 * 2_400


class TestDeterminism:
    def incast(self, seed):
        return make({
            "seed": seed,
            "topology": {"tiers": 1, "radix": 8},
            "traffic": {"motif": "incast", "sources": 6,
                        "transaction_bytes": 300_000,
                        "start_jitter_us": 2.0},
        }, sid="det")

    def csvs(self, m, tmp_path, tag):
        fp, pp = tmp_path / f"f{tag}.csv", tmp_path / f"p{tag}.csv"
        write_flows_csv(m, fp)
        write_ports_csv(m, pp)
        return fp.read_bytes(), pp.read_bytes()

    def test_same_seed_same_bytes(self, tmp_path):
        a = self.csvs(run_scenario(self.incast(9)), tmp_path, "a")
        b = self.csvs(run_scenario(self.incast(9)), tmp_path, "b")
        assert a == b

    def test_seed_changes_outcome(self, tmp_path):
        a = self.csvs(run_scenario(self.incast(9)), tmp_path, "a")
        c = self.csvs(run_scenario(self.incast(10)), tmp_path, "c")
        assert a[0] != c[0]

    def test_pure_backend_identical(self, tmp_path, monkeypatch):
        if kernel_backend() == "pure":
            pytest.skip("no compiled backend in this build")
        a = self.csvs(run_scenario(self.incast(9)), tmp_path, "a")
        monkeypatch.setenv("FABRICLAB_PURE", "1")
        b = self.csvs(run_scenario(self.incast(9)), tmp_path, "p")
        assert a == b


class TestEngineValidation:
    def test_class_outside_configured_range(self):
        sc = make({
            "topology": {"tiers": 1, "radix": 4},
            "pfc": {"classes": 1},
            "traffic": {"motif": "custom",
                        "flows": [{"src": 1, "dst": 0, "bytes": 10,
                                   "class": 1}]},
        })
        with pytest.raises(ScenarioError, match="priority_class"):
            run_scenario(sc)

    def test_unknown_traffic_key(self):
        sc = make({"traffic": {"motif": "incast", "sourcez": 5}})
        with pytest.raises(ScenarioError, match="traffic.sourcez"):
            run_scenario(sc)

    def test_unknown_motif(self):
        sc = make({"traffic": {"motif": "laplace"}})
        with pytest.raises(ScenarioError, match="laplace"):
            run_scenario(sc)

    def test_loss_rule_unknown_node(self):
        sc = one_flow(100, loss=({"src": "h9", "dst": "e0"},))
        with pytest.raises(ScenarioError, match="unknown node"):
            run_scenario(sc)

    def test_loss_rule_not_adjacent(self):
        sc = one_flow(100, loss=({"src": "h0", "dst": "h1"},))
        with pytest.raises(ScenarioError, match="not adjacent"):
            run_scenario(sc)

    def test_group_chain_must_point_backward(self):
        sched = motifs.Schedule(
            flows=[motifs.FlowSpec(flow_id=0, src=1, dst=0, bytes=10,
                                   group=0)],
            groups=[motifs.Group(0, 0)])
        with pytest.raises(ScenarioError, match="forward chain"):
            run_scenario(one_flow(100), schedule=sched)
