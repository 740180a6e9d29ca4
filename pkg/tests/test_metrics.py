"""Result packaging, percentiles, and CSV layout."""

import csv

import pytest

from fabriclab import metrics
from fabriclab.sim import run_scenario, scenario_from_dict


@pytest.fixture(scope="module")
def small_run():
    sc = scenario_from_dict({
        "seed": 6,
        "topology": {"tiers": 1, "radix": 8},
        "traffic": {"motif": "incast", "sources": 4,
                    "transaction_bytes": 100_000, "start_jitter_us": 1.0},
        "sim": {"sample_interval_us": 0.5},
    }, scenario_id="metrics_demo")
    return run_scenario(sc)


class TestPercentile:
    def test_nearest_rank_definition(self):
        vals = list(range(1, 101))
        assert metrics.percentile_nearest_rank(vals, 50) == 50
        assert metrics.percentile_nearest_rank(vals, 99) == 99
        assert metrics.percentile_nearest_rank(vals, 100) == 100
        assert metrics.percentile_nearest_rank(vals, 1) == 1

    def test_small_samples(self):
        assert metrics.percentile_nearest_rank([7], 50) == 7
        assert metrics.percentile_nearest_rank([3, 9], 50) == 3
        assert metrics.percentile_nearest_rank([3, 9], 51) == 9
        assert metrics.percentile_nearest_rank([9, 3], 99) == 9

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            metrics.percentile_nearest_rank([], 50)
        with pytest.raises(ValueError):
            metrics.percentile_nearest_rank([1], 0)
        with pytest.raises(ValueError):
            metrics.percentile_nearest_rank([1], 101)


class TestPackaging:
    def test_flow_fields(self, small_run):
        f = small_run.flows[0]
        assert f.src.startswith("h") and f.dst == "h0"
        assert f.bytes == 100_000
        assert f.fct_ns > 0
        assert f.goodput_gbps == pytest.approx(
            f.bytes * 8 / f.fct_ns, rel=1e-9)

    def test_counters_present(self, small_run):
        c = small_run.counters
        for key in ("sim_time_ns", "events", "total_drops", "pause_frames",
                    "resume_frames", "peak_occupancy_bytes",
                    "max_paused_tiers", "first_pause_ns_by_tier",
                    "delivered_bytes"):
            assert key in c
        assert c["delivered_bytes"] == 4 * 100_000

    def test_derived_echoes_sizing(self, small_run):
        d = small_run.derived
        assert d["headroom_bytes"] > 0
        assert d["buffer_bytes"] == 2 * d["headroom_bytes"]
        assert d["bdp_bytes"] > 0

    def test_completed_property(self, small_run):
        assert small_run.completed == len(small_run.flows) == 4


class TestCsvLayout:
    def test_flows_csv(self, small_run, tmp_path):
        p = tmp_path / "flows.csv"
        metrics.write_flows_csv(small_run, p)
        with open(p) as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == metrics.FLOW_COLUMNS
        assert len(rows) == 1 + 4
        first = dict(zip(rows[0], rows[1]))
        assert first["scenario_id"] == "metrics_demo"
        # fixed decimal places: 3 for times, 6 for rates
        assert len(first["fct_ns"].split(".")[1]) == 3
        assert len(first["goodput_gbps"].split(".")[1]) == 6
        assert int(first["bytes"]) == 100_000

    def test_ports_csv(self, small_run, tmp_path):
        p = tmp_path / "ports.csv"
        metrics.write_ports_csv(small_run, p)
        with open(p) as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == metrics.PORT_COLUMNS
        assert len(rows) > 1
        times = [float(r[0]) for r in rows[1:]]
        assert times == sorted(times)

    def test_summary_contents(self, small_run):
        s = metrics.summarize(small_run)
        assert s["flows"] == s["completed"] == 4
        assert s["p50_fct_ns"] <= s["p99_fct_ns"] <= s["max_fct_ns"]
        assert s["agg_goodput_gbps"] > 0

    def test_summary_without_completions(self):
        m = metrics.RunMetrics(scenario_id="x", flows=[], port_rows=[],
                               pause_log=[], counters={
                                   "total_drops": 0, "pause_frames": 0,
                                   "peak_occupancy_bytes": 0,
                                   "max_paused_tiers": 0, "sim_time_ns": 0.0,
                                   "events": 0})
        s = metrics.summarize(m)
        assert s["p50_fct_ns"] == -1.0
        assert s["agg_goodput_gbps"] == 0.0
