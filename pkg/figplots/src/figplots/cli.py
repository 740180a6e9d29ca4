"""Command line entry: figplots <figure_kind> --in file.csv --out file.png

Column requirements per kind (produced by the matching fabriclab command):

  headroom_generations  bandwidth_gbps, classes, switch_bytes
                        (fabriclab calc headroom, one row set per class count)
  headroom_distance     cable_m, bandwidth_gbps, per_port_bytes
                        (fabriclab calc headroom over --cable-m lists)
  fec_latency           bandwidth_gbps, compute_ns, accumulate_ns, total_ns
                        (fabriclab calc fec-latency)
  bdp_rtt               rtt_us, bandwidth_gbps, bdp_bytes
                        (fabriclab calc bdp)
  sim_compare           scenario_id, flow_id, goodput_gbps, fct_ns
                        (fabriclab sim run flows.csv, concatenated)
"""

import argparse
import sys

from .render import FIGURE_KINDS, SchemaError, render


def build_parser():
    ap = argparse.ArgumentParser(
        prog="figplots",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("figure_kind", choices=sorted(FIGURE_KINDS))
    ap.add_argument("--in", dest="input_csv", required=True,
                    metavar="FILE.csv")
    ap.add_argument("--out", dest="output_image", required=True,
                    metavar="FILE.png")
    ap.add_argument("--x-scale", choices=["linear", "log"], default="linear")
    ap.add_argument("--y-scale", choices=["linear", "log"], default="linear")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        render(args.figure_kind, args.input_csv, args.output_image,
               x_scale=args.x_scale, y_scale=args.y_scale)
    except SchemaError as exc:
        print(f"figplots: error: {exc}", file=sys.stderr)
        sys.exit(1)
    except OSError as exc:
        print(f"figplots: error: {exc}", file=sys.stderr)
        sys.exit(1)
    print(args.output_image)


if __name__ == "__main__":
    main()
