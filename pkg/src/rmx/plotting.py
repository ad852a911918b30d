"""PNG figures for the curve tables written by the harness."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _split(t: np.ndarray, y: np.ndarray):
    # break lines at the repeated kink so the jump is drawn as a jump
    cuts = np.nonzero(np.diff(t) == 0)[0] + 1
    return zip(np.split(t, cuts), np.split(y, cuts))


def _trace(ax, t, y, **kw):
    label = kw.pop("label", None)
    for n, (x, v) in enumerate(_split(t, y)):
        ax.plot(x, v, label=label if n == 0 else None, **kw)


def plot_curves(columns: dict[str, np.ndarray], path: str | Path, title: str = "", kink: float | None = None) -> Path:
    """Two panels: G and H' against t, then extrinsic and channel MMSE against t."""
    path = Path(path)
    t = np.asarray(columns["t"], dtype=float)
    with plt.rc_context(STYLE):
        fig, (left, right) = plt.subplots(1, 2, figsize=(7.0, 3.0), constrained_layout=True)
        _trace(left, t, np.asarray(columns["Hprime"]), color="0.55", lw=1.0, ls="--", label="H'(t)")
        _trace(left, t, np.asarray(columns["G"]), color="C0", lw=1.4, label="G(t)")
        left.set_xlabel("t")
        left.set_ylabel("GEXIT")
        _trace(right, t, np.asarray(columns["M_channel"]), color="0.55", lw=1.0, ls="--", label="M channel")
        _trace(right, t, np.asarray(columns["M_extrinsic"]), color="C3", lw=1.4, label="M extrinsic")
        right.set_xlabel("t")
        right.set_ylabel("MMSE")
        right.set_ylim(-0.02, 1.02)
        for ax in (left, right):
            ax.set_xlim(0.0, 1.0)
            if kink is not None:
                ax.axvline(kink, color="0.8", lw=0.8, zorder=0)
            ax.legend(frameon=False, loc="best")
        if title:
            fig.suptitle(title)
        fig.savefig(path, format="png", metadata={"Software": None})
        plt.close(fig)
    return path
