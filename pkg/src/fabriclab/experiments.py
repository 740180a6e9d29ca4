"""Parameter sweeps over scenarios.

A sweep takes a base scenario and an ordered mapping of dotted parameter
paths to value lists, runs the cartesian product, and writes one directory
per point plus a combined summary.csv.

Seed derivation: every point gets seed = mix(base_seed, point_index) where
mix is the splitmix64 chain from the simulator kernel.  The base seed is
never reused directly, so adding a parameter axis reshuffles nothing: point
index order is the product order of the value lists as given.
"""

import csv
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .metrics import summarize, write_flows_csv, write_ports_csv
from .sim import DeadlockError, run_scenario
from .sim._kernel import mix
from .sim.scenario import validate

SUMMARY_FIELDS = (
    "point", "seed", "deadlock", "completed", "flows",
    "p50_fct_ns", "p99_fct_ns", "max_fct_ns", "agg_goodput_gbps",
    "total_retx_bytes", "total_drops", "pause_frames",
    "peak_occupancy_bytes", "max_paused_tiers", "sim_time_ns",
    "headroom_bytes", "buffer_bytes", "ecn_threshold_bytes",
    "bdp_bytes", "link_rtt_ns", "fabric_rtt_ns",
)


def default_jobs():
    env = os.environ.get("FABRICLAB_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def expand_grid(grid):
    """Ordered cartesian product: list of {path: value} dicts."""
    paths = list(grid)
    points = []
    for combo in itertools.product(*(grid[p] for p in paths)):
        points.append(dict(zip(paths, combo)))
    return points


def _point_scenario(base, params, index):
    sc = base
    for path, value in params.items():
        sc = sc.with_path(path, value)
    sc = sc.with_path("seed", mix(base.seed, index))
    sc = sc.with_path("scenario_id", f"{base.scenario_id}_p{index:03d}")
    validate(sc)
    return sc


def _run_point(args):
    base, params, index, outdir, keep_ports = args
    sc = _point_scenario(base, params, index)
    row = {"point": index, "seed": sc.seed, "deadlock": 0}
    row.update({p: params[p] for p in params})
    row.update({
        "headroom_bytes": sc.headroom_bytes() if sc.pfc.enabled else 0,
        "buffer_bytes": sc.buffer_bytes(),
        "ecn_threshold_bytes": sc.ecn_threshold_bytes(),
        "bdp_bytes": sc.bdp_bytes(),
        "link_rtt_ns": sc.link_rtt_ps() / 1000.0,
        "fabric_rtt_ns": sc.fabric_rtt_ps() / 1000.0,
    })
    pdir = Path(outdir) / f"point_{index:03d}"
    pdir.mkdir(parents=True, exist_ok=True)
    try:
        metrics = run_scenario(sc)
    except DeadlockError as exc:
        row["deadlock"] = 1
        row.update({
            "completed": 0, "flows": len(exc.report["incomplete_flows"]),
            "p50_fct_ns": -1.0, "p99_fct_ns": -1.0, "max_fct_ns": -1.0,
            "agg_goodput_gbps": 0.0, "total_retx_bytes": -1, "total_drops": -1,
            "pause_frames": -1, "peak_occupancy_bytes": -1,
            "max_paused_tiers": -1, "sim_time_ns": exc.report["time_ps"] / 1000.0,
        })
        return row
    write_flows_csv(metrics, pdir / "flows.csv")
    if keep_ports:
        write_ports_csv(metrics, pdir / "ports.csv")
    s = summarize(metrics)
    for key in ("completed", "flows", "p50_fct_ns", "p99_fct_ns", "max_fct_ns",
                "agg_goodput_gbps", "total_retx_bytes", "total_drops",
                "pause_frames", "peak_occupancy_bytes", "max_paused_tiers",
                "sim_time_ns"):
        row[key] = s[key]
    return row


def sweep(base, grid, outdir, jobs=None, keep_ports=True):
    """Run the grid, write point directories and summary.csv, return rows."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    points = expand_grid(grid)
    # fail fast on bad paths or values before any long run
    for i, params in enumerate(points):
        _point_scenario(base, params, i)
    jobs = jobs or default_jobs()
    tasks = [(base, params, i, str(outdir), keep_ports)
             for i, params in enumerate(points)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_point, tasks))
    else:
        rows = [_run_point(t) for t in tasks]
    write_summary_csv(rows, list(grid), base.seed, outdir / "summary.csv")
    return rows


def write_summary_csv(rows, param_paths, base_seed, path):
    fieldnames = ["point", "seed"] + param_paths + [
        f for f in SUMMARY_FIELDS if f not in ("point", "seed")]
    with open(path, "w", newline="") as fh:
        fh.write(f"# base_seed={base_seed}\n")
        fh.write("# point seed = mix(base_seed, point_index), "
                 "splitmix64 chain over both values\n")
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for row in rows:
            out = {}
            for key in fieldnames:
                val = row.get(key, "")
                if isinstance(val, float):
                    val = f"{val:.6f}"
                out[key] = val
            w.writerow(out)
