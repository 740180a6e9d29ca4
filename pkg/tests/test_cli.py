"""Command line interface: calculator output, sim runs, exit codes.

Calculator content is checked in-process through click's test runner; exit
codes and file side effects go through a real subprocess since they are part
of the shell contract.
"""

import csv
import io
import json
import os
import subprocess
import sys

import pytest
from click.testing import CliRunner

from fabriclab.cli import cli


def rows_of(output):
    return list(csv.DictReader(io.StringIO(output)))


def run_cli(args):
    runner = CliRunner()
    res = runner.invoke(cli, args, catch_exceptions=False)
    assert res.exit_code == 0, res.output
    return res.output


def run_proc(args, cwd=None, env_extra=None):
    env = dict(os.environ)
    env.update(env_extra or {})
    return subprocess.run([sys.executable, "-m", "fabriclab.cli", *args],
                          capture_output=True, text=True, cwd=cwd, env=env)


WEDGE_YAML = """\
topology: {tiers: 1, radix: 4}
transport: {mode: selective, timeout_us: 100000}
loss: [{src: h1, dst: e0, drop_seqs: [1]}]
traffic:
  motif: custom
  flows: [{src: 1, dst: 0, bytes: 18300}]
sim: {watchdog_us: 1000}
"""


class TestCalcFec:
    def test_raw_frame_loss_values(self):
        out = run_cli(["calc", "fec", "--scheme", "raw",
                       "--frame-bytes", "4096,9216"])
        r = rows_of(out)
        assert [row["frame_bytes"] for row in r] == ["4096", "9216"]
        assert r[0]["loss_p"] == "3.276800e-08"
        assert r[1]["loss_p"] == "7.372800e-08"
        assert r[0]["cer"] == "nan"   # raw chain has no code stages

    def test_scheme_grid(self):
        out = run_cli(["calc", "fec", "--ber", "1e-5,1e-4", "--hops", "0,5",
                       "--frame-bytes", "9216"])
        r = rows_of(out)
        assert len(r) == 4
        # more hops can only increase the loss probability
        assert float(r[1]["loss_p"]) > float(r[0]["loss_p"])

    def test_custom_scheme(self):
        out = run_cli(["calc", "fec", "--scheme", "custom",
                       "--n", "15", "--k", "11", "--m", "4",
                       "--ber", "1e-2", "--frame-bytes", "8"])
        assert len(rows_of(out)) == 1

    def test_custom_scheme_needs_parameters(self):
        res = CliRunner().invoke(cli, ["calc", "fec", "--scheme", "custom"])
        assert res.exit_code != 0


class TestCalcNumbers:
    def test_headers_profiles(self):
        r = rows_of(run_cli(["calc", "headers"]))
        by = {row["profile"]: row for row in r}
        assert by["rocev2"]["header_bytes"] == "66"
        assert by["ib_local"]["header_bytes"] == "20"
        assert by["rocev2"]["packet_rate_gpps"] == "1.351351e+00"
        assert by["ib_local"]["packet_rate_gpps"] == "3.571429e+00"

    def test_bdp(self):
        r = rows_of(run_cli(["calc", "bdp", "--rtt-us", "3.6,10"]))
        assert r[0]["bdp_bytes"] == "360000"
        assert r[1]["bdp_bytes"] == "1000000"

    def test_headroom_zero_cable(self):
        r = rows_of(run_cli(["calc", "headroom", "--cable-m", "0"]))
        assert r[0]["per_port_bytes"] == "129216"
        assert r[0]["switch_bytes"] == str(129216 * 64 * 8)

    def test_headroom_with_cable(self):
        r = rows_of(run_cli(["calc", "headroom"]))   # default 2 m
        assert r[0]["per_port_bytes"] == "131216"

    def test_fec_latency_halves(self):
        r = rows_of(run_cli(["calc", "fec-latency"]))
        assert [row["bandwidth_gbps"][:5] for row in r] == [
            "1.000", "2.000", "4.000", "8.000"]
        acc = [float(row["accumulate_ns"]) for row in r]
        assert acc[0] == pytest.approx(51.4)
        for a, b in zip(acc, acc[1:]):
            assert a == pytest.approx(2 * b)
        assert float(r[0]["total_ns"]) == pytest.approx(101.4)

    def test_gbn_waste_defaults(self):
        r = rows_of(run_cli(["calc", "gbn-waste"]))
        assert r[0]["bdp_bits"] == "2880000"
        assert r[0]["waste_fraction"] == "1.289062e-06"

    def test_retry_budget_defaults(self):
        r = rows_of(run_cli(["calc", "retry-budget"]))
        assert r[0]["coding_overhead"] == "5.468750e-02"
        assert r[0]["retry_bandwidth_loss"] == "2.000000e-02"


class TestSimCommands:
    def test_gen_run_roundtrip(self, tmp_path):
        gen = run_proc(["sim", "gen", "--out", "case.yaml"], cwd=tmp_path)
        assert gen.returncode == 0
        run = run_proc(["sim", "run", "case.yaml", "--out", "res"],
                       cwd=tmp_path)
        assert run.returncode == 0, run.stderr
        assert (tmp_path / "res" / "flows.csv").exists()
        assert (tmp_path / "res" / "ports.csv").exists()
        assert "completed=8" in run.stdout
        assert "backend=" in run.stdout

    def test_run_set_override_and_quiet(self, tmp_path):
        run_proc(["sim", "gen", "--out", "case.yaml"], cwd=tmp_path)
        run = run_proc(["sim", "run", "case.yaml", "--out", "res",
                        "--set", "traffic.sources=2", "--quiet"],
                       cwd=tmp_path)
        assert run.returncode == 0, run.stderr
        assert run.stdout == ""
        with open(tmp_path / "res" / "flows.csv") as fh:
            assert len(list(csv.reader(fh))) == 1 + 2

    def test_out_env_fallback(self, tmp_path):
        run_proc(["sim", "gen", "--out", "case.yaml"], cwd=tmp_path)
        run = run_proc(["sim", "run", "case.yaml", "--quiet"], cwd=tmp_path,
                       env_extra={"FABRICLAB_OUT": str(tmp_path / "envout")})
        assert run.returncode == 0, run.stderr
        assert (tmp_path / "envout" / "flows.csv").exists()

    def test_sweep(self, tmp_path):
        run_proc(["sim", "gen", "--out", "case.yaml"], cwd=tmp_path)
        run = run_proc(["sim", "sweep", "case.yaml",
                        "--param", "seed=1,2",
                        "--param", "traffic.sources=2,4",
                        "--out", "sw", "--no-ports"], cwd=tmp_path)
        assert run.returncode == 0, run.stderr
        assert "4 points" in run.stdout
        assert (tmp_path / "sw" / "summary.csv").exists()
        for i in range(4):
            pdir = tmp_path / "sw" / f"point_{i:03d}"
            assert (pdir / "flows.csv").exists()
            assert not (pdir / "ports.csv").exists()


class TestExitCodes:
    def test_invalid_scenario_field_is_1(self, tmp_path):
        run_proc(["sim", "gen", "--out", "case.yaml"], cwd=tmp_path)
        run = run_proc(["sim", "run", "case.yaml",
                        "--set", "topology.tiers=9"], cwd=tmp_path)
        assert run.returncode == 1
        assert "tiers" in run.stderr

    def test_unknown_path_is_1(self, tmp_path):
        run_proc(["sim", "gen", "--out", "case.yaml"], cwd=tmp_path)
        run = run_proc(["sim", "run", "case.yaml",
                        "--set", "nope.nope=1"], cwd=tmp_path)
        assert run.returncode == 1

    def test_bad_calc_input_is_1(self):
        run = run_proc(["calc", "fec", "--ber", "banana"])
        assert run.returncode == 1

    def test_deadlock_is_2_with_report(self, tmp_path):
        (tmp_path / "wedge.yaml").write_text(WEDGE_YAML)
        run = run_proc(["sim", "run", "wedge.yaml", "--out", "res"],
                       cwd=tmp_path)
        assert run.returncode == 2
        assert "deadlock" in run.stderr
        report = json.loads((tmp_path / "res" / "deadlock.json").read_text())
        assert report["incomplete_flows"] == [0]
        assert report["scenario_id"] == "wedge"
