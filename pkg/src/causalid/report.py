"""CSV tables and PNG figures for oracle checks and witness pairs."""

from __future__ import annotations

import csv
import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .joint import DiscreteJoint  # noqa: E402

# keeps PNG bytes stable across runs
_PNG_META = {"Software": None}


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def oracle_report(out_dir: str, rows: Sequence[dict], tol: float = 1e-9) -> list[str]:
    """Per-seed discrepancies as ``oracle_check.csv`` and ``oracle_check.png``."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "oracle_check.csv")
    _write_csv(csv_path, ["semantics", "seed", "max_abs_diff"],
               [[r["semantics"], r["seed"], repr(r["max_abs_diff"])] for r in rows])

    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    floor = 1e-18
    for sem, marker in (("MWM", "o"), ("SHARED", "s")):
        pts = [r for r in rows if r["semantics"] == sem]
        if pts:
            ax.scatter([r["seed"] for r in pts], [max(r["max_abs_diff"], floor) for r in pts],
                       s=12, marker=marker, label=sem)
    ax.axhline(tol, color="crimson", lw=1, ls="--", label=f"tolerance {tol:g}")
    ax.set_yscale("log")
    ax.set_xlabel("seed")
    ax.set_ylabel("max |functional - oracle|")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    png_path = os.path.join(out_dir, "oracle_check.png")
    fig.savefig(png_path, dpi=100, metadata=_PNG_META)
    plt.close(fig)
    return [csv_path, png_path]


def _cells(j: DiscreteJoint) -> list[str]:
    return [",".join(f"{n}={s}" for n, s in zip(j.names, idx))
            for idx in np.ndindex(*j.states)]


def witness_report(out_dir: str, t1: DiscreteJoint, t2: DiscreteJoint) -> list[str]:
    """Target tables of both models as ``witness_target.csv`` and a grouped bar chart."""
    os.makedirs(out_dir, exist_ok=True)
    t2 = t2.marginal(t1.names)
    labels = _cells(t1)
    p1, p2 = t1.table.ravel(), t2.table.ravel()
    csv_path = os.path.join(out_dir, "witness_target.csv")
    _write_csv(csv_path, ["cell", "model_1", "model_2"],
               [[c, repr(float(a)), repr(float(b))] for c, a, b in zip(labels, p1, p2)])

    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(labels) + 2), 3.6))
    x = np.arange(len(labels))
    ax.bar(x - 0.2, p1, width=0.4, label="model 1")
    ax.bar(x + 0.2, p2, width=0.4, label="model 2")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("probability")
    ax.set_title(f"total variation {t1.total_variation(t2):.4f}", fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    png_path = os.path.join(out_dir, "witness_target.png")
    fig.savefig(png_path, dpi=100, metadata=_PNG_META)
    plt.close(fig)
    return [csv_path, png_path]
