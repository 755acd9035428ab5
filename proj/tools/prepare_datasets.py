#!/usr/bin/env python3
"""Convert the Pima, Yeast and Red Wine tables shipped in the `common-datasets`
wheel into the comma-separated files under data/.

    pip download --no-deps common-datasets -d /tmp/wheels
    python3 tools/prepare_datasets.py /tmp/wheels/common_datasets-*.whl data/

Yeast's ERL localization (5 rows) is dropped, leaving nine classes.
"""
import csv
import io
import sys
import zipfile

ROOT = "common_datasets/data/"


def read(zf, name):
    return zf.read(ROOT + name).decode("utf-8")


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def pima(zf, out):
    rows = []
    for line in read(zf, "classification/pima/pima.dat").splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        *feats, label = [t.strip() for t in line.split(",")]
        rows.append(feats + ["1" if label == "positive" else "0"])
    write(out + "/pima.csv",
          ["pregnancies", "glucose", "blood_pressure", "skin_thickness",
           "insulin", "bmi", "diabetes_pedigree", "age", "outcome"], rows)


def yeast(zf, out):
    rows = []
    for line in read(zf, "classification/yeast/yeast.data.txt").splitlines():
        parts = line.split()
        if len(parts) != 10 or parts[-1] == "ERL":
            continue
        rows.append(parts[1:])
    write(out + "/yeast.csv",
          ["mcg", "gvh", "alm", "mit", "erl", "pox", "vac", "nuc",
           "localization"], rows)


def red_wine(zf, out):
    text = read(zf, "regression/winequality_red/winequality-red.csv")
    reader = csv.reader(io.StringIO(text), delimiter=";")
    header = [h.strip().replace(" ", "_") for h in next(reader)]
    write(out + "/winequality_red.csv", header, [r for r in reader if r])


def main():
    wheel, out = sys.argv[1], sys.argv[2]
    with zipfile.ZipFile(wheel) as zf:
        pima(zf, out)
        yeast(zf, out)
        red_wine(zf, out)


if __name__ == "__main__":
    main()
