"""Learning-curve figures rendered to files next to the delimited output.

Rendering is a pure function of the CSV contents: the SVG hash salt is
pinned and no timestamp metadata is embedded, so identical inputs produce
identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .experiment import (  # noqa: E402
    COLDSTART_PRETRAINED,
    POLICIES,
    RANDOM_BLANK,
    WARMSTART_UNCERTAINTY,
    AggregateRow,
)

POLICY_COLORS = {
    RANDOM_BLANK: "green",
    WARMSTART_UNCERTAINTY: "blue",
    COLDSTART_PRETRAINED: "orange",
}
LIMIT_COLOR = "red"

POLICY_LABELS = {
    RANDOM_BLANK: "random selection (blank start)",
    WARMSTART_UNCERTAINTY: "uncertainty sampling (blank start)",
    COLDSTART_PRETRAINED: "uncertainty sampling (cold-start pre-trained)",
}


def render_learning_curves(
    aggregates: list[AggregateRow],
    out_path: str,
    limit: float | None = None,
    title: str | None = None,
) -> None:
    """Draw one mean-F1 curve per policy, optionally with a limit line.

    Shaded bands show plus/minus one standard deviation where more than
    one run contributed. Colors are fixed per policy so figures from
    different experiments read the same way.
    """
    if not aggregates:
        raise ValueError("nothing to plot")
    datasets = sorted({row.dataset for row in aggregates})
    if len(datasets) > 1:
        raise ValueError(
            f"results span several datasets ({', '.join(datasets)}); filter first"
        )
    for row in aggregates:
        if row.policy not in POLICIES:
            raise ValueError(
                f"unknown policy {row.policy!r}; valid: {', '.join(POLICIES)}"
            )

    with matplotlib.rc_context({"svg.hashsalt": "coldpref"}):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for policy in POLICIES:
            points = sorted(
                (row for row in aggregates if row.policy == policy),
                key=lambda row: row.queries,
            )
            if not points:
                continue
            queries = [row.queries for row in points]
            means = [row.f1_mean for row in points]
            ax.plot(
                queries,
                means,
                color=POLICY_COLORS[policy],
                label=POLICY_LABELS[policy],
                gid=f"curve-{policy}",
            )
            if any(row.n_runs > 1 for row in points):
                lower = [row.f1_mean - row.f1_std for row in points]
                upper = [row.f1_mean + row.f1_std for row in points]
                ax.fill_between(
                    queries,
                    lower,
                    upper,
                    color=POLICY_COLORS[policy],
                    alpha=0.15,
                    linewidth=0,
                    gid=f"band-{policy}",
                )
        if limit is not None:
            ax.axhline(
                limit,
                color=LIMIT_COLOR,
                linestyle="--",
                label="practical performance limit",
                gid="limit-line",
            )
        ax.set_xlabel("oracle queries")
        ax.set_ylabel("test F1")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", fontsize=8)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        if out_path.endswith(".svg"):
            fig.savefig(out_path, metadata={"Date": None})
        else:
            fig.savefig(out_path)
        plt.close(fig)
