"""Figure rendering for check reports.

Each renderer takes the CheckReport and its margin rows and writes one SVG
next to the delimited output.  Dates are stripped from the SVG metadata so
repeated runs produce comparable files.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .verifier import lemma_f

_SAVE_OPTS = {"bbox_inches": "tight", "metadata": {"Date": None}}


def _new_axes(title):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.set_title(title)
    return fig, ax


def plot_mcp(report, rows, path):
    """Scatter of worst sweep margins against t, colored by transport case."""
    fig, ax = _new_axes(f"contraction margins ({report.name})")
    cases = sorted({r[1] for r in rows if r[0] == "mcp-analytic"})
    for case in cases:
        ts = [r[6] for r in rows if r[0] == "mcp-analytic" and r[1] == case]
        ms = [r[7] for r in rows if r[0] == "mcp-analytic" and r[1] == case]
        ax.scatter(ts, ms, s=12, label=case, alpha=0.7)
    emp_t = [r[6] for r in rows if r[0] == "mcp-empirical"]
    emp_m = [r[7] for r in rows if r[0] == "mcp-empirical"]
    if emp_t:
        ax.scatter(emp_t, emp_m, s=14, marker="x", color="black", label="empirical")
    ax.axhline(0.0, color="red", lw=0.8)
    ax.set_xlabel("t of worst margin")
    ax.set_ylabel("margin (<= 0 passes)")
    ax.legend(fontsize=7, loc="best")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_f_lemma(report, rows, path):
    t = np.linspace(0.0, 1.0, 81)
    l = np.linspace(1e-3, 0.5, 48)
    T, L = np.meshgrid(t, l, indexing="ij")
    F = lemma_f(T, L)
    fig, ax = _new_axes("auxiliary lemma surface")
    pc = ax.pcolormesh(T, L, F, shading="auto")
    fig.colorbar(pc, ax=ax, label="f_l(t)")
    ax.set_xlabel("t")
    ax.set_ylabel("l")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_large_l(report, rows, path):
    fig, ax = _new_axes("long-transport chain link margins")
    names = [r[1] for r in rows]
    vals = [r[7] for r in rows]
    ax.barh(range(len(names)), vals)
    ax.set_yticks(range(len(names)), names, fontsize=7)
    ax.axvline(0.0, color="red", lw=0.8)
    ax.set_xlabel("worst link value (<= 0 passes)")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_diameter(report, rows, path):
    fig, ax = _new_axes("diameter estimate")
    value = report.details["value"]
    ax.bar([0], [value], width=0.4)
    ax.axhline(math.pi, color="red", lw=0.8, label="pi")
    ax.set_xticks([0], ["suspension"])
    ax.set_ylabel("max sampled intrinsic distance")
    ax.legend()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_cd_failure(report, rows, path):
    fig, ax = _new_axes("entropy convexity margins")
    labels = [f"{r[1]} ({r[2]:.2f},{r[3]:.2f})" for r in rows]
    vals = [r[7] for r in rows]
    ax.barh(range(len(vals)), vals)
    ax.set_yticks(range(len(vals)), labels, fontsize=7)
    ax.axvline(0.0, color="red", lw=0.8)
    ax.set_xlabel("convexity margin (negative certifies failure)")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_dimension(report, rows, path):
    fig, ax = _new_axes("local dimension fit excess")
    labels = [f"({r[2]:.2f},{r[3]:.2f}) {r[1]}" for r in rows]
    vals = [r[7] for r in rows]
    ax.barh(range(len(vals)), vals)
    ax.set_yticks(range(len(vals)), labels, fontsize=7)
    ax.axvline(0.0, color="red", lw=0.8)
    ax.set_xlabel("|slope - target| - tol (<= 0 passes)")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_tangent(report, rows, path):
    fig, ax = _new_axes("blow-up comparison distances")
    scales = report.grid["scales"]
    ax.loglog(scales, report.witness["sequence"], "o-", label="dimension-transition point")
    ax.loglog(scales, report.witness["control"], "s--", label="lens center (control)")
    ax.set_xlabel("scale")
    ax.set_ylabel("sampled discrepancy")
    ax.invert_xaxis()
    ax.legend()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_geodesicity(report, rows, path):
    fig, ax = _new_axes("intrinsic vs extrinsic worst ratio")
    ax.bar([0], [report.details["worst_ratio"] - 1.0])
    ax.set_xticks([0], [report.name])
    ax.set_ylabel("worst ratio - 1")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


RENDERERS = {
    "mcp": plot_mcp,
    "f-lemma": plot_f_lemma,
    "large-l": plot_large_l,
    "diameter": plot_diameter,
    "cd-failure": plot_cd_failure,
    "dimension": plot_dimension,
    "tangent": plot_tangent,
    "geodesicity": plot_geodesicity,
}


def render(check_name, report, rows, out_path):
    RENDERERS[check_name](report, rows, out_path)
