"""Figures for scenario results, written to files (Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .scenarios import ScenarioResult  # noqa: E402

STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_entry_cases(result: ScenarioResult, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, (ax_x, ax_l) = plt.subplots(1, 2, figsize=(8, 3.2),
                                         gridspec_kw={"width_ratios": [2.2, 1]})
        _, nodes = result.columns()
        width = 0.8 / max(1, len(result.rows))
        for k, row in enumerate(result.rows):
            xs = [i + k * width for i in range(len(nodes))]
            ax_x.bar(xs, [row.investments.get(v, 0.0) for v in nodes], width,
                     label=f"Case {row.case}")
        ax_x.set_xticks([i + 0.4 - width / 2 for i in range(len(nodes))])
        ax_x.set_xticklabels(nodes, rotation=45, ha="right")
        ax_x.set_ylabel("investment")
        ax_x.legend(ncol=2)
        ax_l.plot([r.case for r in result.rows], [r.loss for r in result.rows], "o-")
        ax_l.set_xlabel("case")
        ax_l.set_ylabel("equilibrium loss")
        return _save(fig, path)


def plot_defense_sweep(result: ScenarioResult, path: Path) -> Path:
    base = result.row("base").loss
    locations = list(result.config.locations)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(locations), figsize=(3 * len(locations), 3),
                                 sharey=True, squeeze=False)
        for ax, loc in zip(axes[0], locations):
            for l_sec in result.config.l_sec_grid:
                rows = [r for r in result.rows
                        if r.params.get("location") == loc and r.params.get("l_sec") == l_sec]
                ax.plot([r.params["p_sec"] for r in rows], [r.loss for r in rows], marker=".",
                        label=f"L_sec={l_sec:g}")
            ax.axhline(base, color="k", lw=0.8, ls="--", label="no safeguard")
            ax.set_title(loc)
            ax.set_xlabel("p_sec")
        axes[0][0].set_ylabel("equilibrium loss")
        axes[0][-1].legend()
        return _save(fig, path)


def plot_redundancy(result: ScenarioResult, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 2.8))
        ax.plot([r.params["redundant"] for r in result.rows], [r.loss for r in result.rows], "s-")
        ax.set_xlabel("redundant sensors")
        ax.set_ylabel("equilibrium loss")
        ax.set_xticks([r.params["redundant"] for r in result.rows])
        return _save(fig, path)


def plot_base(result: ScenarioResult, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 2.8))
        row = result.row("G")
        nodes = list(row.investments)
        ax.bar(nodes, [row.investments[v] for v in nodes])
        ax.set_ylabel("investment")
        ax.set_title(f"equilibrium loss {row.loss:.4g}")
        ax.tick_params(axis="x", rotation=45)
        return _save(fig, path)


PLOTTERS = {
    "base": plot_base,
    "entries": plot_entry_cases,
    "defenses": plot_defense_sweep,
    "redundancy": plot_redundancy,
}


def render(result: ScenarioResult, out_dir: str | Path) -> Path:
    """Draw the family's figure into ``out_dir/<family>.png``."""
    return PLOTTERS[result.family](result, Path(out_dir) / f"{result.family}.png")
