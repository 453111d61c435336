"""Optional SVG rendering of audit curve files (needs matplotlib)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .curves import curve_from_csv

_DIAGONAL = {"reliability", "roc"}


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError("rendering needs matplotlib: pip install 'riskaudit[render]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed metadata keeps repeated renders byte-identical
    plt.rcParams["svg.hashsalt"] = "riskaudit"
    return plt


def render_audit(audit_dir, output_dir) -> list[Path]:
    """One SVG per curve kind, overlaying every group that has the curve."""
    plt = _pyplot()
    audit_dir = Path(audit_dir)
    report = json.loads((audit_dir / "report.json").read_text(encoding="utf-8"))
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    kinds = []
    for g in report["groups"]:
        for k in g["curves"]:
            if k not in kinds:
                kinds.append(k)
    written = []
    for kind in kinds:
        fig, ax = plt.subplots(figsize=(5, 4))
        labels = None
        for g in report["groups"]:
            rel = g["curves"].get(kind)
            if rel is None:
                continue
            c = curve_from_csv((audit_dir / rel).read_text(encoding="utf-8"))
            if c.x.size == 0:
                continue
            labels = c.axis_labels
            line, = ax.plot(c.x, c.y, label=g["name"], lw=1.2)
            if c.has_bands:
                ok = ~np.isnan(c.lower) & ~np.isnan(c.upper)
                ax.fill_between(c.x[ok], c.lower[ok], c.upper[ok], color=line.get_color(), alpha=0.2, lw=0)
        if labels is None:
            plt.close(fig)
            continue
        if kind in _DIAGONAL:
            ax.plot([0, 1], [0, 1], ls=":", color="grey", lw=0.8)
        if kind == "representation":
            ax.axhline(1.0, ls=":", color="grey", lw=0.8)
        ax.set_xlabel(labels[0])
        ax.set_ylabel(labels[1])
        ax.set_title(kind)
        ax.legend(fontsize="small")
        fig.tight_layout()
        p = out / f"{kind}.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(p)
    return written
