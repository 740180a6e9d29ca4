"""Figure renderers: strict CSV schema in, deterministic PNG out.

Each figure kind declares the columns it needs; anything missing aborts
with a message naming the column before any file is touched.  Rendering is
fully deterministic: fixed canvas, fixed fonts, rows sorted before drawing,
and no timestamps in the output.
"""

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# one source of truth for required columns, also used by the CLI help
FIGURE_KINDS = {
    "headroom_generations": ("bandwidth_gbps", "classes", "switch_bytes"),
    "headroom_distance": ("cable_m", "bandwidth_gbps", "per_port_bytes"),
    "fec_latency": ("bandwidth_gbps", "compute_ns", "accumulate_ns",
                    "total_ns"),
    "bdp_rtt": ("rtt_us", "bandwidth_gbps", "bdp_bytes"),
    "sim_compare": ("scenario_id", "flow_id", "goodput_gbps", "fct_ns"),
}

_TEXT_COLUMNS = {"scenario_id", "flow_id", "classes"}

_RC = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


class SchemaError(ValueError):
    """The CSV does not match the producing command's documented columns."""


def read_table(path, required):
    """Load rows and convert the numeric required columns to float."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise SchemaError(f"{path}: empty file, no header row")
        have = set(reader.fieldnames)
        for col in required:
            if col not in have:
                raise SchemaError(
                    f"{path}: missing column '{col}' "
                    f"(found: {', '.join(reader.fieldnames)})")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for i, row in enumerate(rows):
        for col in required:
            if col in _TEXT_COLUMNS:
                continue
            try:
                row[col] = float(row[col])
            except (TypeError, ValueError):
                raise SchemaError(
                    f"{path}: column '{col}' row {i + 1}: "
                    f"not a number: {row[col]!r}")
    return rows


def _series(rows, key, x, y):
    """Split rows into curves keyed by ``key``, x-sorted within each."""
    curves = {}
    for row in rows:
        curves.setdefault(row[key], []).append((row[x], row[y]))
    out = []
    for k in sorted(curves, key=str):
        pts = sorted(curves[k])
        out.append((k, [p[0] for p in pts], [p[1] for p in pts]))
    return out


def _line_figure(rows, key, x, y, xlabel, ylabel, title, label_fmt):
    fig, ax = plt.subplots()
    for k, xs, ys in _series(rows, key, x, y):
        ax.plot(xs, ys, marker="o", markersize=3, label=label_fmt.format(k))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    return fig, ax


def _fig_headroom_generations(rows):
    return _line_figure(
        rows, "classes", "bandwidth_gbps", "switch_bytes",
        "link rate (Gb/s)", "per-switch headroom (bytes)",
        "Lossless headroom across link generations", "{} classes")


def _fig_headroom_distance(rows):
    return _line_figure(
        rows, "bandwidth_gbps", "cable_m", "per_port_bytes",
        "cable length (m)", "per-port headroom (bytes)",
        "Per-port headroom vs. reach", "{:g} Gb/s")


def _fig_fec_latency(rows):
    # one curve per decode pipeline latency, with its floor dashed in;
    # the floor is the compute_ns column, not a recomputed value
    fig, ax = plt.subplots()
    for k, xs, ys in _series(rows, "compute_ns", "bandwidth_gbps",
                             "total_ns"):
        line, = ax.plot(xs, ys, marker="o", markersize=3,
                        label=f"compute {k:g} ns")
        ax.axhline(k, linestyle="--", linewidth=0.8,
                   color=line.get_color(), alpha=0.6)
    ax.set_xlabel("link rate (Gb/s)")
    ax.set_ylabel("decode latency (ns)")
    ax.set_title("Store-and-decode latency vs. link rate")
    ax.legend()
    return fig, ax


def _fig_bdp_rtt(rows):
    return _line_figure(
        rows, "bandwidth_gbps", "rtt_us", "bdp_bytes",
        "round-trip time (us)", "bandwidth-delay product (bytes)",
        "In-flight bytes vs. round-trip time", "{:g} Gb/s")


def _fig_sim_compare(rows):
    # grouped bars: per-flow goodput, one color per scenario
    fig, ax = plt.subplots()
    scenarios = sorted({row["scenario_id"] for row in rows})
    colors = {s: f"C{i}" for i, s in enumerate(scenarios)}
    ordered = sorted(rows, key=lambda r: (r["scenario_id"],
                                          str(r["flow_id"])))
    labels = [f"{r['scenario_id']}\nflow {r['flow_id']}" for r in ordered]
    ax.bar(range(len(ordered)), [r["goodput_gbps"] for r in ordered],
           color=[colors[r["scenario_id"]] for r in ordered])
    ax.set_xticks(range(len(ordered)))
    ax.set_xticklabels(labels, fontsize=6, rotation=45, ha="right")
    ax.set_ylabel("goodput (Gb/s)")
    ax.set_title("Per-flow goodput by scenario")
    return fig, ax


_RENDERERS = {
    "headroom_generations": _fig_headroom_generations,
    "headroom_distance": _fig_headroom_distance,
    "fec_latency": _fig_fec_latency,
    "bdp_rtt": _fig_bdp_rtt,
    "sim_compare": _fig_sim_compare,
}


def render(kind, input_csv, output_image, x_scale="linear",
           y_scale="linear"):
    """Render one figure kind; raises SchemaError before writing anything."""
    if kind not in FIGURE_KINDS:
        raise SchemaError(f"unknown figure kind '{kind}' "
                          f"(choose from: {', '.join(sorted(FIGURE_KINDS))})")
    rows = read_table(input_csv, FIGURE_KINDS[kind])
    with plt.rc_context(_RC):
        fig, ax = _RENDERERS[kind](rows)
        ax.set_xscale(x_scale)
        ax.set_yscale(y_scale)
        fig.tight_layout()
        # fixed metadata keeps repeated renders byte-identical
        fig.savefig(output_image, format="png",
                    metadata={"Software": "figplots"})
        plt.close(fig)
    return output_image
