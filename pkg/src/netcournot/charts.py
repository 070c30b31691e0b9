"""Static chart rendering for sweep results.

Kept separate so the core library carries no drawing dependency; matplotlib
is imported lazily and only when charts are requested.  Charts are derived
views: every number they show is in the CSV.
"""

from __future__ import annotations

import warnings
from pathlib import Path

from .sweep import SweepRow

_LINE_STYLES = ("-", "--", ":", "-.")


def _grouped(rows: list[SweepRow]):
    by_m: dict[float, list[SweepRow]] = {}
    for row in rows:
        if row.feasible:
            by_m.setdefault(row.m, []).append(row)
    return {m: sorted(group, key=lambda r: r.b) for m, group in sorted(by_m.items())}


def _placeholder(path: Path, title: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    warnings.warn(f"no feasible rows to plot for {title}; emitting placeholder")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.text(0.5, 0.5, "no feasible rows", ha="center", va="center", transform=ax.transAxes)
    ax.set_title(title)
    ax.set_axis_off()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_charts(rows: list[SweepRow], out_dir: str | Path) -> list[Path]:
    """Emit the welfare-difference and policy-instrument charts as SVG.

    One line style per m value; only feasible rows are drawn.  Returns the
    paths written.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not rows:
        raise ValueError("render_charts needs at least one sweep row")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mode = rows[0].mode
    groups = _grouped(rows)

    welfare_path = out_dir / f"welfare_differences_{mode}.svg"
    policy_path = out_dir / f"policy_instruments_{mode}.svg"
    if not groups:
        return [
            _placeholder(welfare_path, f"welfare differences ({mode})"),
            _placeholder(policy_path, f"policy instruments ({mode})"),
        ]

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharex=True)
    panels = (("dW1", "foreign welfare difference"), ("dW2", "home welfare difference"), ("dW", "aggregate welfare difference"))
    for ax, (col, title) in zip(axes, panels):
        for style, (m, group) in zip(_LINE_STYLES, groups.items()):
            ax.plot([r.b for r in group], [getattr(r, col) for r in group], style, label=f"m = {m:g}")
        ax.axhline(0.0, color="gray", lw=0.6)
        ax.set_title(title)
        ax.set_xlabel("b")
    axes[0].legend()
    fig.suptitle(f"Nash minus laissez-faire welfare ({mode} R&D)")
    fig.tight_layout()
    fig.savefig(welfare_path)
    plt.close(fig)

    if mode == "product":
        sub_cols = (("sigma1_star", "foreign subsidy"), ("sigma2_star", "home subsidy"))
    else:
        sub_cols = (("s1_star", "foreign subsidy"), ("s2_star", "home subsidy"))
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharex=True)
    for ax, (col, title) in zip(axes, sub_cols + (("t_star", "home tax"),)):
        for style, (m, group) in zip(_LINE_STYLES, groups.items()):
            ax.plot([r.b for r in group], [getattr(r, col) for r in group], style, label=f"m = {m:g}")
        ax.axhline(0.0, color="gray", lw=0.6)
        ax.set_title(title)
        ax.set_xlabel("b")
    axes[0].legend()
    fig.suptitle(f"Nash policy instruments ({mode} R&D)")
    fig.tight_layout()
    fig.savefig(policy_path)
    plt.close(fig)

    return [welfare_path, policy_path]
