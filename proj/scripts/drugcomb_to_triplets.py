"""Convert raw DrugComb and GDSC downloads into triplets.csv and cells.csv.

See scripts/fetch_data.sh for the expected inputs and the column mapping.
"""

import argparse
import csv
import os
import sys


def read_csv(path, **kw):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh, **kw))


def write_triplets(dest, score):
    smiles = {r["dname"]: r["smiles"].strip() for r in read_csv(os.path.join(dest, "drugs.csv")) if r.get("smiles")}
    column = "synergy_" + score
    kept = skipped = 0
    with open(os.path.join(dest, "triplets.csv"), "w", newline="") as out:
        w = csv.writer(out)
        w.writerow(["drug_a_smiles", "drug_b_smiles", "cell_line_id", "synergy_score"])
        with open(os.path.join(dest, "summary.csv"), newline="", encoding="utf-8") as fh:
            for r in csv.DictReader(fh):
                a, b, s = smiles.get(r["drug_row"]), smiles.get(r.get("drug_col") or ""), r.get(column, "")
                if not a or not b or s in ("", "NA", "nan"):
                    skipped += 1
                    continue
                w.writerow([a, b, r["cell_line_name"], s])
                kept += 1
    print(f"triplets.csv: {kept} rows, {skipped} skipped", file=sys.stderr)


def write_cells(dest):
    landmarks = [g.strip() for g in open(os.path.join(dest, "landmarks.txt")) if g.strip()]
    if len(landmarks) != 908:
        sys.exit(f"landmarks.txt lists {len(landmarks)} genes, expected 908")
    expr = {}
    with open(os.path.join(dest, "Cell_line_RMA_proc_basalExp.txt"), newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader)
        for row in reader:
            expr[row[0]] = row
    missing = [g for g in landmarks if g not in expr]
    if missing:
        sys.exit(f"{len(missing)} landmark genes absent from the GDSC matrix, e.g. {missing[:5]}")
    col = {name: i for i, name in enumerate(header)}
    written = 0
    with open(os.path.join(dest, "cells.csv"), "w", newline="") as out:
        w = csv.writer(out)
        w.writerow(["cell_line_id"] + [f"g{k}" for k in range(908)])
        for r in read_csv(os.path.join(dest, "cell_lines.csv")):
            i = col.get(f"DATA.{r.get('cosmo_id', '').strip()}")
            if i is None:
                continue
            w.writerow([r["name"]] + [expr[g][i] for g in landmarks])
            written += 1
    print(f"cells.csv: {written} cell lines", file=sys.stderr)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dest", default="data/raw")
    ap.add_argument("--score", default="loewe", choices=["loewe", "bliss", "zip", "hsa"])
    args = ap.parse_args()
    write_triplets(args.dest, args.score)
    write_cells(args.dest)


if __name__ == "__main__":
    main()
