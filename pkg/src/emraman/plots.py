"""PNG rendering of the figure tables (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .figures import Table  # noqa: E402

_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "svg.hashsalt": "emraman",
}


def _finish(fig, ax, path: Union[str, Path], xlabel: str, ylabel: str, title: str) -> Path:
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Software": None})
    plt.close(fig)
    return out


def plot_table(figure_id: str, table: Table, path: Union[str, Path]) -> Path:
    """Render one figure table to ``path`` (PNG)."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if figure_id == "variety":
            x = table.column("xi")
            for j in range(1, 6):
                ax.plot(x, table.column(f"lambda{j}"), label=f"lambda{j}")
            return _finish(fig, ax, path, "xi", "lambda_j", "characteristic variety")
        if figure_id in ("stable-resonances", "unstable-resonances"):
            pairs = [r[0] for r in table.rows]
            for pr in dict.fromkeys(pairs):
                for cid in sorted({r[1] for r in table.rows if r[0] == pr}):
                    pts = np.array([[r[2], r[3]] for r in table.rows if r[0] == pr and r[1] == cid])
                    ax.plot(pts[:, 0], pts[:, 1], label=f"R{pr}" if cid == 0 else None)
            return _finish(fig, ax, path, "xi", "|eta|", figure_id.replace("-", " "))
        if figure_id == "trace-vs-k":
            k = table.column("k")
            for c in table.columns[1:]:
                ax.plot(k, table.column(c), label=c)
            ax.axhline(0.0, color="0.6", lw=0.8)
            return _finish(fig, ax, path, "k", "trace", "trace at the resonances")
        if figure_id == "rate-vs-k":
            k = table.column("k")
            ax.plot(k, table.column("gamma_backward"), label="backward")
            ax.plot(k, table.column("gamma_forward"), label="forward")
            return _finish(fig, ax, path, "k", "gamma", "Raman growth rates")
        plt.close(fig)
    raise ValueError(f"no renderer for {figure_id!r}")
