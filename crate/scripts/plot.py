"""Plot the CSVs written by `capkaya fit` and `capkaya project`.

    python scripts/plot.py data/synthetic/out

Writes PNGs next to the CSVs: capital_fit.png, one <plan>.png per scenario
(stacked components) and relative.png when a baseline was available.
"""

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    cols = {k: [] for k in rows[0]} if rows else {}
    for row in rows:
        for k, v in row.items():
            cols[k].append(float(v) if v else float("nan"))
    return cols


def capital_fit(out):
    path = out / "capital_fit.csv"
    if not path.exists():
        return
    d = read(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(d["year"], d["observed"], "o", ms=3, label="observed")
    ax.plot(d["year"], d["modelled"], "-", label="model")
    ax.set_ylabel("capital emissions (Mt CO2/yr)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "capital_fit.png", dpi=120)
    plt.close(fig)


def scenarios(out):
    for path in sorted((out / "scenarios").glob("*.csv")):
        d = read(path)
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.stackplot(
            d["year"],
            [d["E_K"], d["E_C"], d["E_I"]],
            labels=["capital", "consumption", "investment"],
            colors=["#7f7f7f", "#ff7f0e", "#8c564b"],
        )
        ax.set_title(path.stem)
        ax.set_ylabel("Mt CO2/yr")
        ax.legend(loc="upper left")
        fig.tight_layout()
        fig.savefig(out / "scenarios" / f"{path.stem}.png", dpi=120)
        plt.close(fig)


def relative(out):
    path = out / "relative.csv"
    if not path.exists():
        return
    d = read(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    for name, values in d.items():
        if name != "year":
            ax.plot(d["year"], values, label=name)
    ax.axhline(100, color="k", lw=0.5)
    ax.set_ylabel("% of baseline")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "relative.png", dpi=120)
    plt.close(fig)


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "out")
    capital_fit(out)
    scenarios(out)
    relative(out)


if __name__ == "__main__":
    main()
