"""Report figures rendered to files alongside the delimited sweep output."""

from __future__ import annotations

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sweep import SweepRow, SweepSummary


def save_sweep_figures(
    rows: List[SweepRow], summary: SweepSummary, out_dir: Path,
    basename: str = "sweep",
) -> List[Path]:
    """Render the two ballistic-limit figures as PNG files.

    Figure 1: scaled Poincare constant and rescaled variance against t.
    Figure 2: the three log-Sobolev estimates (scaled by t) against t.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(rows, key=lambda r: r.t)
    ts = [r.t for r in ordered]
    paths = []

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(ts, [r.poincare_over_t for r in ordered], "o-", label="spectral gap / t")
    ax.plot(ts, [r.rescaled_var for r in ordered], "s--", label="rescaled variance")
    ax.axhline(1.0 / summary.lambda_min, color="gray", lw=0.8,
               label="1 / min curvature")
    ax.set_xscale("log")
    ax.set_xlabel("temperature t")
    ax.set_ylabel("scaled Poincare constant")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p1 = out_dir / f"{basename}_poincare.png"
    fig.savefig(p1, dpi=150)
    plt.close(fig)
    paths.append(p1)

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(ts, [r.ls_lower / r.t for r in ordered], "v-", label="test-family lower / t")
    ax.plot(ts, [r.ls_variational_over_t for r in ordered], "o-", label="variational / t")
    ax.plot(ts, [r.ls_upper / r.t for r in ordered], "^-", label="tightened upper / t")
    ax.axhline(summary.cpl_static, color="gray", lw=0.8, label="static PL constant")
    ax.set_xscale("log")
    ax.set_xlabel("temperature t")
    ax.set_ylabel("scaled log-Sobolev estimates")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p2 = out_dir / f"{basename}_logsobolev.png"
    fig.savefig(p2, dpi=150)
    plt.close(fig)
    paths.append(p2)
    return paths
