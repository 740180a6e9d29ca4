"""Command line front end.

Two groups: ``calc`` for closed-form link/protocol math and ``sim`` for
packet-level runs.  calc subcommands accept comma-separated value lists and
emit the cartesian product as CSV on stdout.  Exit codes: 0 success, 1
invalid input, 2 runtime fault (deadlocked simulation).
"""

import csv
import json
import os
import sys
from pathlib import Path

import click

from . import budget, fec, headers
from .experiments import default_jobs, sweep
from .metrics import summarize, write_flows_csv, write_ports_csv
from .sim import DeadlockError, kernel_backend, load_scenario, run_scenario
from .sim.scenario import ScenarioError, validate
from .units import gbps_to_bps, us_to_ps


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise click.BadParameter(f"not a number list: {text!r}")


def _ints(text):
    try:
        return [int(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise click.BadParameter(f"not an integer list: {text!r}")


def _emit(columns, rows):
    w = csv.writer(sys.stdout)
    w.writerow(columns)
    for row in rows:
        w.writerow(row)


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6e}"
    return x


@click.group()
def cli():
    """Datacenter fabric sizing calculators and a packet-level simulator."""


# ---------------------------------------------------------------------------


@cli.group()
def calc():
    """Closed-form calculators; value lists expand to CSV rows."""


def _scheme_from(preset, n, k, m, burst):
    if preset == "rs544":
        return fec.RS544
    if preset == "raw":
        return None
    if n is None or k is None or m is None:
        raise click.BadParameter("custom scheme needs --n, --k and --m")
    return fec.FecScheme(n=n, k=k, m=m, burst_correction=burst or 0)


@calc.command("fec")
@click.option("--ber", default="1e-12", help="Input bit error rates, comma list.")
@click.option("--frame-bytes", default="4096", help="Frame payload sizes in bytes, comma list.")
@click.option("--hops", default="0", help="Switch hop counts, comma list.")
@click.option("--scheme", "preset", type=click.Choice(["rs544", "raw", "custom"]),
              default="rs544", show_default=True)
@click.option("--n", type=int, default=None, help="Codeword symbols (custom scheme).")
@click.option("--k", type=int, default=None, help="Data symbols (custom scheme).")
@click.option("--m", type=int, default=None, help="Bits per symbol (custom scheme).")
@click.option("--burst", type=int, default=None, help="Correctable burst bits (custom scheme).")
def calc_fec(ber, frame_bytes, hops, preset, n, k, m, burst):
    """End-to-end frame loss probability through the error chain."""
    scheme = _scheme_from(preset, n, k, m, burst)
    rows = []
    for b in _floats(ber):
        for fb in _ints(frame_bytes):
            for h in _ints(hops):
                q = fec.ErrorQuery(ber_in=b, frame_bits=fb * 8, hops=h,
                                   scheme=scheme)
                r = fec.loss_chain(q)
                rows.append((
                    _fmt(b), fb, h,
                    _fmt(r["ser_in"]), _fmt(r["cer"]),
                    _fmt(r["fer"]), _fmt(r["loss_p"]),
                ))
    _emit(("ber", "frame_bytes", "hops", "ser_in", "cer", "fer", "loss_p"), rows)


@calc.command("fec-latency")
@click.option("--bandwidth-gbps", default="100,200,400,800", show_default=True,
              help="Link rates, comma list.")
@click.option("--compute-ns", default=50.0, show_default=True,
              help="Decoder pipeline time in ns.")
@click.option("--data-bits", default=None, type=int,
              help="Bits accumulated before decode; default: scheme data bits.")
def calc_fec_latency(bandwidth_gbps, compute_ns, data_bits):
    """Store-and-decode latency of the standard code across link rates."""
    bits = data_bits if data_bits is not None else fec.RS544.data_bits
    rows = []
    for bw in _floats(bandwidth_gbps):
        total = fec.fec_latency_ns(bits, gbps_to_bps(bw), compute_ns)
        ser = total - compute_ns
        rows.append((_fmt(bw), bits, _fmt(ser), _fmt(compute_ns), _fmt(total)))
    _emit(("bandwidth_gbps", "data_bits", "accumulate_ns", "compute_ns",
           "total_ns"), rows)


@calc.command("gbn-waste")
@click.option("--loss-p", default="3.3e-8", help="Frame loss probabilities, comma list.")
@click.option("--bandwidth-gbps", default=800.0, show_default=True)
@click.option("--rtt-us", default=3.6, show_default=True)
@click.option("--frame-bytes", default="9216", help="Frame sizes in bytes, comma list.")
def calc_gbn_waste(loss_p, bandwidth_gbps, rtt_us, frame_bytes):
    """Go-back-n retransmission bandwidth as a fraction of link capacity."""
    bdp_bits = 8 * budget.bdp_bytes(gbps_to_bps(bandwidth_gbps),
                                    us_to_ps(rtt_us))
    rows = []
    for p in _floats(loss_p):
        for fb in _ints(frame_bytes):
            waste = fec.goback_n_waste(p, bdp_bits, fb * 8)
            rows.append((_fmt(p), bdp_bits, fb, _fmt(waste),
                         _fmt(waste * 100.0)))
    _emit(("loss_p", "bdp_bits", "frame_bytes", "waste_fraction",
           "waste_percent"), rows)


@calc.command("retry-budget")
@click.option("--payload-bytes", default=242, show_default=True)
@click.option("--fec-bytes", default=6, show_default=True)
@click.option("--crc-bytes", default=8, show_default=True)
@click.option("--retry-p", default="0.02", help="Retry probabilities, comma list.")
def calc_retry_budget(payload_bytes, fec_bytes, crc_bytes, retry_p):
    """Overhead split for a lightweight-FEC link with retransmission."""
    rows = []
    for p in _floats(retry_p):
        lb = fec.RetryLinkBudget(block_payload_bytes=payload_bytes,
                                 fec_bytes=fec_bytes, crc_bytes=crc_bytes,
                                 retry_probability=p)
        r = fec.link_retry_overhead(lb)
        rows.append((payload_bytes, fec_bytes, crc_bytes, _fmt(p),
                     _fmt(r["coding_overhead"]),
                     _fmt(r["retry_bandwidth_loss"])))
    _emit(("payload_bytes", "fec_bytes", "crc_bytes", "retry_p",
           "coding_overhead", "retry_bandwidth_loss"), rows)


@calc.command("headroom")
@click.option("--bandwidth-gbps", default="800", help="Link rates, comma list.")
@click.option("--cable-m", default="2", help="Cable lengths in meters, comma list.")
@click.option("--per-hop-ns", default=600.0, show_default=True,
              help="One-way forwarding plus transceiver latency per link.")
@click.option("--wire-ns-per-m", default=5.0, show_default=True)
@click.option("--mtu-bytes", default=9216, show_default=True)
@click.option("--ports", default=64, show_default=True)
@click.option("--classes", default=8, show_default=True)
def calc_headroom(bandwidth_gbps, cable_m, per_hop_ns, wire_ns_per_m,
                  mtu_bytes, ports, classes):
    """Lossless headroom per port-class and worst-case per switch."""
    rows = []
    for bw in _floats(bandwidth_gbps):
        for cm in _floats(cable_m):
            geom = budget.LinkGeometry(
                bandwidth_bps=gbps_to_bps(bw), cable_length_m=cm,
                wire_delay_ns_per_m=wire_ns_per_m,
                per_hop_latency_ns=per_hop_ns, mtu_bytes=mtu_bytes)
            shape = budget.FabricShape(ports_per_switch=ports,
                                       priority_classes=classes)
            rtt = budget.link_rtt_ps(geom)
            per_port = budget.headroom_per_port_bytes(
                geom.bandwidth_bps, rtt, mtu_bytes)
            total = budget.switch_headroom_bytes(per_port, shape)
            rows.append((_fmt(bw), _fmt(cm), _fmt(rtt / 1000.0),
                         per_port, ports, classes, total))
    _emit(("bandwidth_gbps", "cable_m", "link_rtt_ns", "per_port_bytes",
           "ports", "classes", "switch_bytes"), rows)


@calc.command("bdp")
@click.option("--bandwidth-gbps", default="800", help="Link rates, comma list.")
@click.option("--rtt-us", default="3.6", help="Round-trip times, comma list.")
def calc_bdp(bandwidth_gbps, rtt_us):
    """Bandwidth-delay product in bytes."""
    rows = []
    for bw in _floats(bandwidth_gbps):
        for rtt in _floats(rtt_us):
            b = budget.bdp_bytes(gbps_to_bps(bw), us_to_ps(rtt))
            rows.append((_fmt(bw), _fmt(rtt), b))
    _emit(("bandwidth_gbps", "rtt_us", "bdp_bytes"), rows)


@calc.command("headers")
@click.option("--profile", default="rocev2,ib_local",
              help="Header stacks, comma list (rocev2, ib_local).")
@click.option("--payload-bytes", default="8", help="Payload sizes, comma list.")
@click.option("--bandwidth-gbps", default=800.0, show_default=True)
def calc_headers(profile, payload_bytes, bandwidth_gbps):
    """Header totals, packet rates, and wire efficiency per profile."""
    rows = []
    for name in str(profile).split(","):
        name = name.strip()
        if name not in headers.PROFILES:
            raise click.BadParameter(f"unknown profile '{name}'")
        hdr = headers.header_bytes(headers.PROFILES[name])
        for pb in _ints(payload_bytes):
            rate = headers.packet_rate_pps(gbps_to_bps(bandwidth_gbps), pb, hdr)
            eff = headers.wire_efficiency(pb, hdr)
            rows.append((name, pb, hdr, _fmt(bandwidth_gbps),
                         _fmt(rate / 1e9), _fmt(eff)))
    _emit(("profile", "payload_bytes", "header_bytes", "bandwidth_gbps",
           "packet_rate_gpps", "wire_efficiency"), rows)


# ---------------------------------------------------------------------------


@cli.group()
def sim():
    """Packet-level simulation of scenario files."""


def _out_dir(out):
    if out:
        return Path(out)
    env = os.environ.get("FABRICLAB_OUT")
    return Path(env) if env else Path(".")


def _coerce(text):
    t = str(text)
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    if low == "auto":
        return "auto"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def _parse_params(params):
    grid = {}
    for item in params:
        path, sep, values = item.partition("=")
        if not sep or not path:
            raise click.BadParameter(f"expected path=value[,value...]: {item!r}")
        grid[path] = [_coerce(v) for v in values.split(",")]
    return grid


@sim.command("run")
@click.argument("scenario_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, help="Output directory "
              "(default: $FABRICLAB_OUT or current directory).")
@click.option("--set", "overrides", multiple=True, metavar="PATH=VALUE",
              help="Override a scenario field, e.g. seed=7 or "
              "pfc.headroom_bytes=65536.  Repeatable.")
@click.option("--quiet", is_flag=True, help="Suppress the summary printout.")
def sim_run(scenario_path, out, overrides, quiet):
    """Run one scenario; writes flows.csv and ports.csv."""
    sc = load_scenario(scenario_path)
    for path, values in _parse_params(overrides).items():
        if len(values) != 1:
            raise click.BadParameter(f"--set takes a single value: {path}")
        sc = sc.with_path(path, values[0])
    validate(sc)
    outdir = _out_dir(out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        metrics = run_scenario(sc)
    except DeadlockError as exc:
        report = dict(exc.report)
        report["scenario_id"] = sc.scenario_id
        path = outdir / "deadlock.json"
        with open(path, "w") as fh:
            json.dump(report, fh, indent=2)
        click.echo(f"deadlock: no forward progress at "
                   f"{report['time_ps'] / 1e6:.3f} us; report in {path}",
                   err=True)
        sys.exit(2)
    write_flows_csv(metrics, outdir / "flows.csv")
    write_ports_csv(metrics, outdir / "ports.csv")
    if not quiet:
        s = summarize(metrics)
        s["backend"] = kernel_backend()
        for key, val in s.items():
            if isinstance(val, float):
                val = f"{val:.6f}"
            click.echo(f"{key}={val}")


@sim.command("sweep")
@click.argument("scenario_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--param", "params", multiple=True, required=True,
              metavar="PATH=V1,V2,...",
              help="Sweep axis as dotted path with comma values.  Repeatable; "
              "axes combine as a cartesian product.")
@click.option("--out", default=None, help="Output directory "
              "(default: $FABRICLAB_OUT or current directory).")
@click.option("--jobs", default=None, type=int,
              help="Parallel worker processes (default: $FABRICLAB_JOBS or 1).")
@click.option("--no-ports", is_flag=True, help="Skip per-point ports.csv files.")
def sim_sweep(scenario_path, params, out, jobs, no_ports):
    """Run a parameter grid; writes point_NNN/ dirs and summary.csv."""
    sc = load_scenario(scenario_path)
    grid = _parse_params(params)
    outdir = _out_dir(out)
    rows = sweep(sc, grid, outdir, jobs=jobs or default_jobs(),
                 keep_ports=not no_ports)
    click.echo(f"{len(rows)} points -> {outdir / 'summary.csv'}")


_TEMPLATE = """\
# Scenario skeleton.  Sizing fields accepting 'auto' are derived from the
# topology: headroom = link BDP + 2 MTU, buffer = 2x headroom,
# ECN threshold = half the end-to-end BDP, window = one BDP.
scenario_id: example
seed: 1
topology:
  tiers: 2
  radix: 8
  bandwidth_gbps: 800
  per_hop_ns: 600
  cable_m: 2
  mtu_bytes: 9216
transport:
  mode: go_back_n        # go_back_n | selective
  timeout_us: 500
  cc:
    mode: rate           # rate | window
    decrease_factor: 0.5
    increase_period_us: 10
    increase_step_gbps: 25
pfc:
  enabled: true
  classes: 2
  headroom_bytes: auto
ecn:
  threshold_bytes: auto
routing:
  policy: ecmp           # ecmp | flowlet | spray
  flowlet_gap_us: 1
traffic:
  motif: incast          # incast | obs | ls_chain | custom
  sources: 8
  transaction_bytes: 10240
  start_jitter_us: 1
"""


@sim.command("gen")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write to a file instead of stdout.")
def sim_gen(out):
    """Emit a commented scenario skeleton."""
    if out:
        Path(out).write_text(_TEMPLATE)
        click.echo(f"wrote {out}")
    else:
        click.echo(_TEMPLATE, nl=False)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except (ScenarioError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except DeadlockError as exc:
        click.echo(f"deadlock: {exc.report}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
