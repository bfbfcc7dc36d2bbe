#!/usr/bin/env python3
"""Plot a Weyl-chamber trajectory CSV produced by `gulps trajectory`.

Usage: plot_trajectory.py traj1.csv [traj2.csv ...] [-o out.png]

Documentation example for an external plotter; the CLI itself never plots.
"""

import argparse

import matplotlib.pyplot as plt
import pandas as pd
from mpl_toolkits.mplot3d.art3d import Poly3DCollection

CHAMBER_VERTICES = {
    "O": (0.0, 0.0, 0.0),
    "A1": (0.5, 0.0, 0.0),
    "A2": (0.25, 0.25, 0.0),
    "A3": (0.25, 0.25, 0.25),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csvs", nargs="+")
    ap.add_argument("-o", "--out", default="trajectories.png")
    args = ap.parse_args()

    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")

    # chamber wireframe
    names = list(CHAMBER_VERTICES)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            pa, pb = CHAMBER_VERTICES[a], CHAMBER_VERTICES[b]
            ax.plot(*zip(pa, pb), color="0.75", lw=0.8)
    faces = [
        [CHAMBER_VERTICES[k] for k in ("O", "A1", "A2")],
        [CHAMBER_VERTICES[k] for k in ("O", "A2", "A3")],
    ]
    ax.add_collection3d(Poly3DCollection(faces, alpha=0.05, color="gray"))

    for path in args.csvs:
        df = pd.read_csv(path, comment="#")
        ax.plot(df.c1, df.c2, df.c3, marker="o", ms=4, label=path)

    ax.set_xlabel("c1 / pi")
    ax.set_ylabel("c2 / pi")
    ax.set_zlabel("c3 / pi")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.out, dpi=160)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
