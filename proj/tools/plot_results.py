#!/usr/bin/env python3
"""Render RMSE and cost plots from a btmc run CSV.

Usage: plot_results.py results_smooth_gaussian.csv [out_prefix]
Writes <out_prefix>_rmse.png and <out_prefix>_work.png.
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_run_csv(path):
    header = {}
    rows = {"eps": [], "rmse": [], "work": []}
    in_header = False
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line == "---":
                in_header = not in_header
                continue
            if in_header:
                key, _, value = line.partition(": ")
                header[key] = value
                continue
            cells = line.split(",")
            if len(cells) >= 13 and cells[0] == "rmse":
                rows["eps"].append(float(cells[2]))
                rows["rmse"].append(float(cells[11]))
                rows["work"].append(float(cells[12]))
    return header, rows


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 1
    path = sys.argv[1]
    prefix = sys.argv[2] if len(sys.argv) > 2 else path.rsplit(".", 1)[0]
    header, rows = read_run_csv(path)
    if not rows["eps"]:
        print(f"no rmse rows found in {path}")
        return 1
    name = header.get("scenario", "run")

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(rows["eps"], rows["rmse"], "o-", label="realized RMSE")
    ax.loglog(rows["eps"], rows["eps"], "k--", label=r"$\varepsilon$")
    ax.loglog(rows["eps"], [3 * e for e in rows["eps"]], "k:", label=r"$3\varepsilon$")
    ax.set_xlabel(r"prescribed accuracy $\varepsilon$")
    ax.set_ylabel("RMSE")
    ax.set_title(name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(f"{prefix}_rmse.png", dpi=150)

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(rows["eps"], rows["work"], "s-", label="work units per replicate")
    ax.set_xlabel(r"prescribed accuracy $\varepsilon$")
    ax.set_ylabel("work units")
    ax.set_title(name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(f"{prefix}_work.png", dpi=150)
    print(f"wrote {prefix}_rmse.png and {prefix}_work.png")
    return 0


if __name__ == "__main__":
    sys.exit(main())
