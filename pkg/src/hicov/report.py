"""CSV, figure, and plot-script output for campaign results.

The CSV layout is one tidy row per (grid point, test):

    grid_param,test,n,p,alpha,reps,reject_rate,mc_stderr,theory_power,seed

with '.' decimals, '\\n' line endings and an empty theory_power where no
prediction is defined.  Figures are rendered with the Agg backend so the
CLI works headless; the optional emitted plot script is self-contained and
re-draws the same figure from the CSV alone.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict

from .harness import PowerCurve

CSV_COLUMNS = (
    "grid_param",
    "test",
    "n",
    "p",
    "alpha",
    "reps",
    "reject_rate",
    "mc_stderr",
    "theory_power",
    "seed",
)


def curve_rows(curves: list[PowerCurve]) -> list[dict[str, str]]:
    """Flatten campaigns into CSV-ready string rows (deterministic formatting)."""
    rows = []
    for curve in curves:
        cfg = curve.config
        for pt in curve.points:
            rows.append(
                {
                    "grid_param": pt.grid_param,
                    "test": pt.test,
                    "n": str(cfg.n),
                    "p": str(cfg.p),
                    "alpha": f"{cfg.alpha:g}",
                    "reps": str(pt.reps),
                    "reject_rate": f"{pt.reject_rate:.6f}",
                    "mc_stderr": f"{pt.mc_stderr:.6f}",
                    "theory_power": "" if pt.theory_power is None else f"{pt.theory_power:.6f}",
                    "seed": str(cfg.seed),
                }
            )
    return rows


def csv_text(curves: list[PowerCurve]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(curve_rows(curves))
    return buf.getvalue()


def write_csv(curves: list[PowerCurve], path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(csv_text(curves))


def format_summary(curves: list[PowerCurve]) -> str:
    """Fixed-width table of all cells, for terminal output."""
    header = f"{'grid':>10} {'test':>5} {'n':>5} {'p':>5} {'rate':>8} {'stderr':>8} {'theory':>8}"
    lines = [header, "-" * len(header)]
    for row in curve_rows(curves):
        lines.append(
            f"{row['grid_param']:>10} {row['test']:>5} {row['n']:>5} {row['p']:>5} "
            f"{row['reject_rate']:>8} {row['mc_stderr']:>8} "
            f"{row['theory_power'] if row['theory_power'] else '-':>8}"
        )
    return "\n".join(lines)


def render_figure(curves: list[PowerCurve], path) -> None:
    """Render rejection-rate curves with theory overlays to an image file.

    One panel per campaign (n, p); solid lines with 1-stderr error bars for
    empirical rates, dashed lines for predictions, a dotted line at alpha.
    Grid points without a numeric coordinate (e.g. explicit matrices) are
    skipped.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = [c for c in curves if c.points]
    fig, axes = plt.subplots(
        1, max(len(panels), 1), figsize=(5.5 * max(len(panels), 1), 4.2), squeeze=False
    )
    for ax, curve in zip(axes[0], panels):
        cfg = curve.config
        by_test: dict[str, list[tuple[float, float, float, float | None]]] = defaultdict(list)
        for pt in curve.points:
            try:
                x = float(pt.grid_param)
            except ValueError:
                continue
            by_test[pt.test].append((x, pt.reject_rate, pt.mc_stderr, pt.theory_power))
        xs_all = [x for pts in by_test.values() for (x, *_rest) in pts]
        log_x = bool(xs_all) and min(xs_all) > 0 and max(xs_all) / min(xs_all) >= 20
        for test, pts in by_test.items():
            pts.sort()
            xs = [q[0] for q in pts]
            rates = [q[1] for q in pts]
            errs = [q[2] for q in pts]
            line = ax.errorbar(xs, rates, yerr=errs, marker="o", markersize=4,
                               capsize=2, linewidth=1.4, label=test)
            theory = [(x, t) for x, _r, _e, t in pts if t is not None]
            if theory:
                ax.plot([q[0] for q in theory], [q[1] for q in theory], "--",
                        linewidth=1.1, color=line.lines[0].get_color(),
                        label=f"{test} theory")
        if log_x:
            ax.set_xscale("log")
        ax.axhline(cfg.alpha, color="gray", linestyle=":", linewidth=1)
        ax.set_ylim(-0.02, 1.02)
        ax.set_xlabel("alternative parameter")
        ax.set_ylabel("rejection rate")
        ax.set_title(f"n={cfg.n}, p={cfg.p}, reps={cfg.reps}")
        ax.legend(fontsize=8)
        ax.grid(True, linestyle="--", linewidth=0.5, alpha=0.6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


_PLOT_SCRIPT = '''#!/usr/bin/env python3
"""Re-draw rejection-rate curves from a campaign CSV.

Self-contained: needs only matplotlib.  Usage:

    python {script_name} [CSV_PATH] [OUTPUT_IMAGE]
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

csv_path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
out_path = sys.argv[2] if len(sys.argv) > 2 else {out_path!r}

panels = defaultdict(lambda: defaultdict(list))
alphas = {{}}
with open(csv_path, newline="") as fh:
    for row in csv.DictReader(fh):
        try:
            x = float(row["grid_param"])
        except ValueError:
            continue
        key = (int(row["n"]), int(row["p"]), int(row["reps"]))
        alphas[key] = float(row["alpha"])
        theory = float(row["theory_power"]) if row["theory_power"] else None
        panels[key][row["test"]].append(
            (x, float(row["reject_rate"]), float(row["mc_stderr"]), theory)
        )

keys = sorted(panels)
fig, axes = plt.subplots(1, max(len(keys), 1),
                         figsize=(5.5 * max(len(keys), 1), 4.2), squeeze=False)
for ax, key in zip(axes[0], keys):
    n, p, reps = key
    xs_all = [x for pts in panels[key].values() for (x, *_r) in pts]
    log_x = bool(xs_all) and min(xs_all) > 0 and max(xs_all) / min(xs_all) >= 20
    for test, pts in panels[key].items():
        pts.sort()
        xs = [q[0] for q in pts]
        line = ax.errorbar(xs, [q[1] for q in pts], yerr=[q[2] for q in pts],
                           marker="o", markersize=4, capsize=2,
                           linewidth=1.4, label=test)
        theory = [(q[0], q[3]) for q in pts if q[3] is not None]
        if theory:
            ax.plot([q[0] for q in theory], [q[1] for q in theory], "--",
                    linewidth=1.1, color=line.lines[0].get_color(),
                    label=test + " theory")
    if log_x:
        ax.set_xscale("log")
    ax.axhline(alphas[key], color="gray", linestyle=":", linewidth=1)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("alternative parameter")
    ax.set_ylabel("rejection rate")
    ax.set_title(f"n={{n}}, p={{p}}, reps={{reps}}")
    ax.legend(fontsize=8)
    ax.grid(True, linestyle="--", linewidth=0.5, alpha=0.6)
fig.tight_layout()
fig.savefig(out_path, dpi=150)
print(f"wrote {{out_path}}")
'''


def write_plot_script(script_path, csv_path, image_path) -> None:
    """Emit a standalone script that re-renders the figure from the CSV."""
    import os

    text = _PLOT_SCRIPT.format(
        script_name=os.path.basename(str(script_path)),
        csv_path=str(csv_path),
        out_path=str(image_path),
    )
    with open(script_path, "w", encoding="ascii") as fh:
        fh.write(text)
