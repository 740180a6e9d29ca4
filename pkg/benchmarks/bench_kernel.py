"""Benchmark the compiled event kernel against the pure-Python fallback.

Runs the same hot incast scenario on both backends, checks the results are
bit-identical, and reports events/second.  Usage:

    python3 benchmarks/bench_kernel.py [--sources N] [--kib PER_FLOW]
                                       [--repeat R]
"""

import argparse
import os
import time

from fabriclab.metrics import summarize
from fabriclab.sim import run_scenario, scenario_from_dict
from fabriclab.sim.engine import kernel_backend


def build_scenario(sources, kib):
    return scenario_from_dict({
        "seed": 12,
        "topology": {"tiers": 2, "radix": 8},
        "ecn": {"enabled": False},
        "traffic": {"motif": "incast", "sources": sources,
                    "transaction_bytes": kib * 1024,
                    "start_jitter_us": 1.0},
    }, scenario_id="bench")


def snapshot(metrics):
    """Everything deterministic about a run, for equality checking."""
    flows = tuple(
        (f.flow_id, f.start_ns, f.fct_ns, f.retx_bytes, f.drops,
         f.inject_done_ns, f.first_feedback_ns, f.rto_count)
        for f in metrics.flows)
    return flows, tuple(metrics.port_rows), tuple(metrics.pause_log), \
        tuple(sorted(metrics.counters.items()))


def run_backend(sc, pure, repeat):
    old = os.environ.pop("FABRICLAB_PURE", None)
    if pure:
        os.environ["FABRICLAB_PURE"] = "1"
    try:
        best, metrics = None, None
        for _ in range(repeat):
            t0 = time.perf_counter()
            metrics = run_scenario(sc)
            dt = time.perf_counter() - t0
            best = dt if best is None or dt < best else best
        return best, metrics
    finally:
        os.environ.pop("FABRICLAB_PURE", None)
        if old is not None:
            os.environ["FABRICLAB_PURE"] = old


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sources", type=int, default=31)
    ap.add_argument("--kib", type=int, default=1024,
                    help="transaction size per sender in KiB")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    sc = build_scenario(args.sources, args.kib)
    t_pure, m_pure = run_backend(sc, pure=True, repeat=args.repeat)
    events = m_pure.counters["events"]
    s = summarize(m_pure)
    print(f"scenario: incast {args.sources}x{args.kib} KiB, "
          f"{events} events, sim {s['sim_time_ns'] / 1e3:.1f} us, "
          f"drops {s['total_drops']}")
    print(f"{'backend':<10} {'best of ' + str(args.repeat):>12} "
          f"{'events/s':>12} {'speedup':>8}")
    print(f"{'pure':<10} {t_pure:>11.3f}s {events / t_pure:>12.0f} "
          f"{'1.00x':>8}")

    if kernel_backend() != "compiled":
        print("compiled   unavailable (built without a C toolchain)")
        return

    t_c, m_c = run_backend(sc, pure=False, repeat=args.repeat)
    if snapshot(m_pure) != snapshot(m_c):
        raise SystemExit("FAIL: backends disagree on results")
    print(f"{'compiled':<10} {t_c:>11.3f}s {events / t_c:>12.0f} "
          f"{t_pure / t_c:>7.2f}x")
    print("results: bit-identical across backends")


if __name__ == "__main__":
    main()
