"""Figure rendering for simulation reports and baseline comparisons.

Everything draws through the Agg backend straight to files; nothing here
opens a window.  The CLI calls these next to the CSV/JSON writers so a
report directory is self-contained.
"""

from __future__ import annotations

import os


def _pyplot():
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    return plt


def force_time_figure(report, path):
    """Per-iteration force time on a log axis, with tuning-phase
    boundaries and each phase's selected configuration."""
    plt = _pyplot()
    iterations = [r.iteration for r in report.records]
    force_ms = [r.force_ns / 1e6 for r in report.records]
    fig, ax = plt.subplots(figsize=(10, 4.5))
    ax.plot(iterations, force_ms, lw=0.6, color="#1f77b4")
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("force time [ms]")
    ax.set_title(f"{report.name}: {report.strategy_name}")
    selections = report.selections_by_phase()
    phase_starts = {}
    for r in report.records:
        phase_starts.setdefault(r.phase_index, r.iteration)
    for phase, start in sorted(phase_starts.items()):
        if phase > 0:
            ax.axvline(start, color="0.8", lw=0.7, zorder=0)
        label = selections.get(phase)
        if label:
            ax.annotate(label, (start, 1.0), xycoords=("data",
                                                       "axes fraction"),
                        rotation=90, fontsize=6, va="top", ha="left",
                        color="0.3")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def selection_figure(report, path):
    """Which configuration each phase selected, as a categorical step
    chart over phases."""
    plt = _pyplot()
    selections = sorted(report.selections_by_phase().items())
    fig, ax = plt.subplots(figsize=(10, 4.5))
    if selections:
        order = []
        for _, cid in selections:
            if cid not in order:
                order.append(cid)
        ys = [order.index(cid) for _, cid in selections]
        xs = [p for p, _ in selections]
        ax.step(xs, ys, where="post", marker="o", color="#d62728")
        ax.set_yticks(range(len(order)))
        ax.set_yticklabels(order, fontsize=7)
    ax.set_xlabel("tuning phase")
    ax.set_title(f"{report.name}: selected configuration per phase")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def comparison_figure(result, path, top: int = 15):
    """Baseline-sweep totals as horizontal bars (fastest ``top`` shown)
    with the strategy's own total marked."""
    plt = _pyplot()
    rows = [r for r in result.baselines
            if r.error is None and not r.timed_out]
    rows.sort(key=lambda r: r.total_force_ns)
    rows = rows[:top]
    skipped = [r for r in result.baselines
               if r.error is not None or r.timed_out]
    fig, ax = plt.subplots(figsize=(9, 0.35 * max(8, len(rows)) + 1.5))
    names = [r.configuration_id for r in rows]
    vals = [r.total_force_ns / 1e9 for r in rows]
    ax.barh(range(len(rows)), vals, color="#2ca02c")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("total force time [s]")
    strategy_s = result.report.total_force_ns / 1e9
    ax.axvline(strategy_s, color="#d62728", lw=1.2,
               label=f"{result.report.strategy_name} ({strategy_s:.3g}s)")
    ax.legend(fontsize=8)
    title = f"{result.name}: best single configurations"
    if skipped:
        title += f" ({len(skipped)} timed out / failed)"
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(report, outdir, prefix: str) -> list[str]:
    paths = []
    paths.append(force_time_figure(
        report, os.path.join(outdir, f"{prefix}.force-times.png")))
    if report.phase_selections:
        paths.append(selection_figure(
            report, os.path.join(outdir, f"{prefix}.selections.png")))
    return paths


def render_comparison_figure(result, outdir, prefix: str) -> list[str]:
    if not result.baselines:
        return []
    return [comparison_figure(
        result, os.path.join(outdir, f"{prefix}.comparison.png"))]
