"""Render the admission-threshold phase diagram.

Generates the grid with the library and colors each (mu1, mu2) cell by
its phase label. Writes phase_diagram.png next to this script.

    python3 docs/examples/plot_phase_diagram.py [--step 0.02]
"""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

from tandemstab import phase_classify

LABELS = ["A1", "A2", "A3", "A4"]
DESCRIPTIONS = [
    "A1: every threshold, even no rejection",
    "A2: every finite threshold",
    "A3: thresholds up to a finite maximum",
    "A4: no threshold works",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--step", type=float, default=0.02)
    ap.add_argument("--max", type=float, default=3.0)
    args = ap.parse_args()

    values = np.arange(args.step, args.max + args.step / 2, args.step)
    grid = np.empty((values.size, values.size), dtype=int)
    for i, m1 in enumerate(values):
        for j, m2 in enumerate(values):
            grid[j, i] = LABELS.index(phase_classify(m1, m2))

    cmap = ListedColormap(["#4daf4a", "#a6d854", "#ffd92f", "#e41a1c"])
    fig, ax = plt.subplots(figsize=(6.2, 5.4))
    ax.pcolormesh(values, values, grid, cmap=cmap, vmin=0, vmax=3, shading="nearest")
    ax.set_xlabel("mu1 (node-1 service rate)")
    ax.set_ylabel("mu2 (node-2 service rate)")
    ax.set_title("Which admission thresholds stabilize the tandem")
    handles = [plt.Rectangle((0, 0), 1, 1, color=cmap(k)) for k in range(4)]
    ax.legend(handles, DESCRIPTIONS, loc="upper right", fontsize=7, framealpha=0.9)
    out = pathlib.Path(__file__).with_name("phase_diagram.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
