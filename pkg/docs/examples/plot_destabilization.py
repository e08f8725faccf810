"""Speeding up node 1 can destabilize the network.

For the admission rule lambda = (0.01, 0.01, 5, 0, 0, ...) with mu2 = 1,
the stability criterion for mu1 < 1 compares the expected admission rate
seen against a geometric downstream queue with mu1. Plotting that ratio
shows it is not monotone: the system is stable at mu1 = 0.2 yet unstable
at mu1 = 0.5. Writes destabilization.png next to this script.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tandemstab import RateFunction, expected_rate_geometric

LAM = RateFunction(prefix=(0.01, 0.01, 5.0), cycle=(0.0,))
MU2 = 1.0


def main():
    mu1 = np.linspace(0.02, 0.99, 400)
    ratio = np.array(
        [expected_rate_geometric(LAM, m / MU2) / m for m in mu1]
    )
    fig, ax = plt.subplots(figsize=(6.2, 4.2))
    ax.plot(mu1, ratio, lw=2)
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    for m, label in [(0.2, "stable"), (0.5, "unstable")]:
        v = expected_rate_geometric(LAM, m / MU2) / m
        ax.plot([m], [v], "o", color="#e41a1c" if v > 1 else "#4daf4a")
        ax.annotate(f"mu1={m}: {label}", (m, v), textcoords="offset points",
                    xytext=(8, -4), fontsize=9)
    ax.set_xlabel("mu1 (node-1 service rate), mu2 = 1")
    ax.set_ylabel("expected admission rate / mu1")
    ax.set_title("Above the dashed line the system is unstable")
    out = pathlib.Path(__file__).with_name("destabilization.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
