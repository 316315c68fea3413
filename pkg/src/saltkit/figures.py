"""Matplotlib renderings written next to the delimited train/eval outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_loss_curve(records: list[dict], path: str | Path) -> Path:
    """Loss components per step; a second panel shows reward accuracy when a
    preference objective was trained."""
    steps = [r["step"] for r in records]
    has_dpo = any(r.get("dpo") for r in records)
    ncols = 2 if has_dpo else 1
    fig, axes = plt.subplots(1, ncols, figsize=(6 * ncols, 4))
    ax = axes[0] if has_dpo else axes
    ax.plot(steps, [r["total"] for r in records], label="total", lw=1.5)
    if any(r["ai_side"] for r in records):
        ax.plot(steps, [r["ai_side"] for r in records], label="ai side", lw=1.0)
    if any(r["edit_side"] for r in records):
        ax.plot(steps, [r["edit_side"] for r in records], label="edit side", lw=1.0)
    ax.set_xlabel("step")
    ax.set_ylabel("loss (batch mean)")
    ax.legend()
    ax.set_title(records[0].get("variant", "") if records else "")
    if has_dpo:
        ax2 = axes[1]
        ax2.plot(steps, [r["dpo"]["reward_acc"] for r in records if r.get("dpo")], color="tab:green")
        ax2.set_xlabel("step")
        ax2.set_ylabel("reward accuracy")
        ax2.set_ylim(-0.05, 1.05)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_metric_report(report: dict, path: str | Path) -> Path:
    """Bar panels for ROUGE F1 and SAGE group counts (plus baseline ratios)."""
    ratios = report.get("ratios_vs_baseline")
    ncols = 3 if ratios else 2
    fig, axes = plt.subplots(1, ncols, figsize=(4.2 * ncols, 3.6))

    axes[0].bar(["R1", "R2", "RL"], [report["rouge1"], report["rouge2"], report["rougeL"]], color="tab:blue")
    axes[0].set_ylim(0, 1.05)
    axes[0].set_title("ROUGE F1")

    sage = report["sage"]
    labels = ["w:g1", "w:g2", "w:g3", "c:g1", "c:g2", "c:g3"]
    values = [
        sage["word"]["g1"],
        sage["word"]["g2"],
        sage["word"]["g3"],
        sage["concept"]["g1"],
        sage["concept"]["g2"],
        sage["concept"]["g3"],
    ]
    colors = ["tab:red", "tab:green", "tab:gray"] * 2
    axes[1].bar(labels, values, color=colors)
    axes[1].set_title("SAGE counts")

    if ratios:
        rvalues = [
            ratios["word"]["g1"],
            ratios["word"]["g2"],
            ratios["word"]["g3"],
            ratios["concept"]["g1"],
            ratios["concept"]["g2"],
            ratios["concept"]["g3"],
        ]
        shown = [v if v is not None else 0.0 for v in rvalues]
        axes[2].bar(labels, shown, color=colors)
        axes[2].axhline(1.0, color="black", lw=0.8, ls="--")
        axes[2].set_title("SAGE / baseline")
        for idx, v in enumerate(rvalues):
            if v is None:
                axes[2].text(idx, 0.02, "n/a", ha="center", fontsize=8)

    fig.suptitle(report.get("variant", ""))
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
