#!/usr/bin/env python3
"""Build the five benchmark CSVs under data/.

Diabetes (Pima), Letter and Mushrooms come from the KEEL copies bundled in the
`keel-ds` wheel. Yeast is rebuilt with its ten original classes from the
binarized KEEL variants bundled in `imbalanced-databases`. Waveform is drawn
from Breiman's generator (waveform-5000 layout: 21 noisy attributes, 3 classes).

Usage: tools/prepare_datasets.py [--out data] [--cache /tmp/safs-wheels]
"""

import argparse
import collections
import csv
import os
import subprocess
import sys
import zipfile

import numpy as np

PIMA_COLUMNS = ["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age"]
LETTER_COLUMNS = ["x-box", "y-box", "width", "high", "onpix", "x-bar", "y-bar", "x2bar",
                  "y2bar", "xybar", "x2ybr", "xy2br", "x-ege", "xegvy", "y-ege", "yegvx"]
YEAST_COLUMNS = ["mcg", "gvh", "alm", "mit", "erl", "pox", "vac", "nuc"]
MUSHROOM_COLUMNS = ["cap-shape", "cap-surface", "cap-color", "bruises", "odor",
                    "gill-attachment", "gill-spacing", "gill-size", "gill-color",
                    "stalk-shape", "stalk-root", "stalk-surface-above-ring",
                    "stalk-surface-below-ring", "stalk-color-above-ring",
                    "stalk-color-below-ring", "veil-type", "veil-color", "ring-number",
                    "ring-type", "spore-print-color", "population", "habitat"]


def fetch_wheel(package, cache):
    target = os.path.join(cache, package)
    os.makedirs(target, exist_ok=True)
    wheels = [f for f in os.listdir(target) if f.endswith(".whl")]
    if not wheels:
        subprocess.check_call([sys.executable, "-m", "pip", "download", "--no-deps",
                               "--only-binary", ":all:", "-q", package, "-d", target])
        wheels = [f for f in os.listdir(target) if f.endswith(".whl")]
    return zipfile.ZipFile(os.path.join(target, wheels[0]))


def keel_rows(wheel, member):
    text = wheel.read(member).decode("utf-8")
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([cell.strip() for cell in line.split(",")])
    return rows


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"{path}: {len(rows)} rows, {len(header) - 1} features")


def build_diabetes(keel, out):
    rows = keel_rows(keel, "keel_ds/data/balanced/raw/pima.dat")
    write_csv(os.path.join(out, "diabetes.csv"), PIMA_COLUMNS + ["class"], rows)


def build_letter(keel, out):
    rows = keel_rows(keel, "keel_ds/data/balanced/raw/letter.dat")
    write_csv(os.path.join(out, "letter.csv"), LETTER_COLUMNS + ["class"], rows)


def build_mushrooms(keel, out):
    # stalk-root is the attribute with missing values in the UCI release; dropping
    # it leaves the 21 categorical attributes.
    rows = keel_rows(keel, "keel_ds/data/balanced/raw/mushroom.dat")
    drop = MUSHROOM_COLUMNS.index("stalk-root")
    header = [c for i, c in enumerate(MUSHROOM_COLUMNS) if i != drop] + ["class"]
    kept = [[c for i, c in enumerate(r) if i != drop] for r in rows]
    write_csv(os.path.join(out, "mushrooms.csv"), header, kept)


def build_yeast(imb, out):
    # Variants differ in row order and number formatting, and some drop the pox
    # column when it is constant within the subset. Rows are matched by value.
    def load(name):
        rows = keel_rows(imb, f"imbalanced_databases/data/{name}/{name}.dat")
        out = []
        for r in rows:
            values = tuple(round(float(v), 2) for v in r[:-1])
            if len(values) == 7:
                values = values[:5] + (None,) + values[5:]
            out.append((values, r[-1]))
        return out

    def project(x, pool_has_pox):
        return x if pool_has_pox else x[:5] + (None,) + x[6:]

    base = [x for x, _ in load("yeast1")]
    labels = [None] * len(base)

    sources = [("yeast1", "positive", "NUC"), ("yeast3", "positive", "ME3"),
               ("yeast4", "positive", "ME2"), ("yeast5", "positive", "ME1"),
               ("yeast6", "positive", "EXC"), ("yeast-1_vs_7", "positive", "VAC"),
               ("yeast-2_vs_8", "positive", "POX"), ("yeast-2_vs_4", "negative", "CYT")]
    for name, tag, cls in sources:
        rows = load(name)
        has_pox = rows[0][0][5] is not None
        pool = collections.Counter(x for x, t in rows if t == tag)
        for i, x in enumerate(base):
            key = project(x, has_pox)
            if labels[i] is None and pool[key] > 0:
                labels[i] = cls
                pool[key] -= 1
    for i, x in enumerate(base):
        if labels[i] is None:
            labels[i] = "ERL" if x[4] == 1.0 else "MIT"
    formatted = [[f"{v:.2f}" for v in x] for x in base]

    counts = collections.Counter(labels)
    print("yeast class counts:", dict(counts))
    rows = [x + [y] for x, y in zip(formatted, labels)]
    write_csv(os.path.join(out, "yeast.csv"), YEAST_COLUMNS + ["class"], rows)


def build_waveform(out, n=5000, seed=5000):
    peak = lambda c: np.maximum(6 - np.abs(np.arange(21) - c), 0).astype(float)
    bases = [peak(6), peak(10), peak(14)]
    pairs = [(0, 1), (0, 2), (1, 2)]
    rng = np.random.default_rng(seed)
    classes = rng.integers(0, 3, size=n)
    rows = []
    for c in classes:
        a, b = pairs[c]
        u = rng.uniform()
        x = u * bases[a] + (1 - u) * bases[b] + rng.normal(size=21)
        rows.append([f"{v:.2f}" for v in x] + [str(c)])
    header = [f"x{i + 1}" for i in range(21)] + ["class"]
    write_csv(os.path.join(out, "waveform.csv"), header, rows)


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.path.join(here, "..", "data"))
    parser.add_argument("--cache", default="/tmp/safs-wheels")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    keel = fetch_wheel("keel-ds==0.2.5", args.cache)
    imb = fetch_wheel("imbalanced-databases==0.1.1", args.cache)
    build_diabetes(keel, args.out)
    build_yeast(imb, args.out)
    build_letter(keel, args.out)
    build_waveform(args.out)
    build_mushrooms(keel, args.out)


if __name__ == "__main__":
    main()
