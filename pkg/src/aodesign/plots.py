"""Matplotlib renderers for CLI artifacts (PNG output only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def save_bandshapes_png(path: Path, shapes: list[dict]) -> None:
    """Each entry: {label, f_mhz, eff_db, band (lo, hi)}."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for entry in shapes:
        ax.plot(entry["f_mhz"], entry["eff_db"], label=entry["label"])
        lo, hi = entry["band"]
        ax.axvspan(lo, hi, alpha=0.12)
    ax.set_xlabel("RF frequency (MHz)")
    ax.set_ylabel("relative efficiency (dB)")
    ax.set_ylim(-30, 1)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_fom_heatmap_png(path: Path, rows: list[dict]) -> None:
    phi_o = sorted({r["phi_o_deg"] for r in rows})
    phi_a = sorted({r["phi_a_deg"] for r in rows})
    grid = np.zeros((len(phi_o), len(phi_a)))
    for r in rows:
        i = phi_o.index(r["phi_o_deg"])
        j = phi_a.index(r["phi_a_deg"])
        grid[i, j] = r["fom"]
    half_a = 0.5 * (phi_a[1] - phi_a[0]) if len(phi_a) > 1 else 0.5
    half_o = 0.5 * (phi_o[1] - phi_o[0]) if len(phi_o) > 1 else 0.5
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(grid, origin="lower", aspect="auto",
                   extent=[min(phi_a) - half_a, max(phi_a) + half_a,
                           min(phi_o) - half_o, max(phi_o) + half_o])
    ax.set_xlabel("acoustic rotation (deg)")
    ax.set_ylabel("optical rotation (deg)")
    fig.colorbar(im, ax=ax, label="figure of merit (MHz/mm^3)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_png(path: Path, rows: list[dict]) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    branches = sorted({r["branch"] for r in rows})
    for branch in branches:
        pts = [(r["theta_deg"], r["velocity_mm_per_us"])
               for r in rows if r["branch"] == branch and r["phi_deg"] == 45.0]
        if not pts:
            pts = [(r["theta_deg"], r["velocity_mm_per_us"])
                   for r in rows if r["branch"] == branch]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=branch)
    ax.set_xlabel("polar angle (deg)")
    ax.set_ylabel("phase velocity (mm/us)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_field_png(path: Path, grid_abs: np.ndarray, transverse_mm: np.ndarray,
                   distances_mm: np.ndarray) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    im = ax.imshow(grid_abs.T, origin="lower", aspect="auto",
                   extent=[distances_mm[0], distances_mm[-1],
                           transverse_mm[0], transverse_mm[-1]])
    ax.set_xlabel("propagation distance (mm)")
    ax.set_ylabel("transverse position (mm)")
    fig.colorbar(im, ax=ax, label="|amplitude|")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
