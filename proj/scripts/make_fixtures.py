"""Generate the synthetic triplet/cell-line fixtures under tests/data/.

Labels follow a planted rule: every drug d carries a sign u_d, every cell line
c a sign v_c, and score = 12 * v_c * (u_a + u_b) + noise. Pairs with
u_a = -u_b land in the unlabeled band. A handful of dirty rows (unknown cell
line, unparseable SMILES, exact and conflicting duplicates, missing score) are
mixed in so every preprocessing filter fires. expected.json records the counts
the generator planted.

Usage: python scripts/make_fixtures.py
"""

import csv
import json
import os
import random

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "tests", "data")
NUM_GENES = 908


def pick_drugs(rng, count):
    rows = []
    with open(os.path.join(DATA, "smiles_corpus.tsv")) as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            smi = row["smiles"]
            if row["reference_accepts"] != "1" or "." in smi or "[" in smi:
                continue
            if 8 <= int(row["num_atoms"]) <= 28:
                rows.append(smi)
    rows.sort()
    return rng.sample(rows, count)


def build(name, num_drugs, num_cells, num_labeled, seed):
    rng = random.Random(seed)
    nrng = np.random.default_rng(seed)
    out_dir = os.path.join(DATA, name)
    os.makedirs(out_dir, exist_ok=True)

    drugs = pick_drugs(rng, num_drugs)
    drug_sign = {d: rng.choice([-1, 1]) for d in drugs}
    cells = [f"CELL{i:02d}" for i in range(num_cells)]
    cell_sign = {c: (1 if i % 2 == 0 else -1) for i, c in enumerate(cells)}

    with open(os.path.join(out_dir, "cells.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_line_id"] + [f"g{i}" for i in range(NUM_GENES)])
        for c in cells:
            vec = nrng.normal(0.0, 1.0, NUM_GENES)
            vec[:16] += 2.0 * cell_sign[c]
            w.writerow([c] + [f"{v:.4f}" for v in vec])

    combos = [(a, b, c) for i, a in enumerate(drugs) for b in drugs[i + 1:] for c in cells]
    rng.shuffle(combos)

    rows = []
    labeled = positives = in_band = 0
    used = []
    for a, b, c in combos:
        if labeled == num_labeled:
            break
        noise = rng.uniform(-1.5, 1.5)
        score = round(12.0 * cell_sign[c] * (drug_sign[a] + drug_sign[b]) + noise, 3)
        if rng.random() < 0.5:
            a, b = b, a
        rows.append([a, b, c, f"{score}"])
        if -10 <= score <= 10:
            in_band += 1
        else:
            labeled += 1
            positives += score > 10
            used.append((a, b, c, score))
    assert labeled == num_labeled

    dirty = []
    # Unknown cell line.
    for k in range(3):
        dirty.append([drugs[k], drugs[k + 1], "CELL_UNKNOWN", "25.0"])
    # Unparseable SMILES (unclosed ring, unknown element, unbalanced branch).
    dirty.append(["C1CC", drugs[0], cells[0], "30.0"])
    dirty.append(["CC[Xx]", drugs[1], cells[1], "-30.0"])
    dirty.append(["CC(C", drugs[2], cells[0], "30.0"])
    # Exact duplicates, one with the pair reversed.
    a, b, c, s = used[0]
    dirty.append([a, b, c, f"{s}"])
    a, b, c, s = used[1]
    dirty.append([b, a, c, f"{s}"])
    # Conflicting duplicates: the mean keeps the original label.
    a, b, c, s = used[2]
    dirty.append([b, a, c, f"{round(s + (1.0 if s > 0 else -1.0), 3)}"])
    # Row with a missing score is rejected by the loader.
    dirty.append([drugs[3], drugs[4], cells[0], ""])

    all_rows = rows + dirty
    rng.shuffle(all_rows)
    with open(os.path.join(out_dir, "triplets.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["drug_a_smiles", "drug_b_smiles", "cell_line_id", "synergy_score"])
        w.writerows(all_rows)

    drugs_used = sorted({x for a, b, _, _ in used for x in (a, b)})
    cells_used = sorted({c for _, _, c, _ in used})
    expected = {
        "raw_rows": len(all_rows),
        "rejected_rows": 1,
        "loaded": len(all_rows) - 1,
        "dropped_missing_cell": 3,
        "dropped_bad_smiles": 3,
        "dropped_exact_duplicate": 2,
        "merged_conflicting": 1,
        "dropped_unlabeled_band": in_band,
        "samples": labeled,
        "positives": positives,
        "drugs": len(drugs_used),
        "cell_lines": len(cells_used),
    }
    with open(os.path.join(out_dir, "expected.json"), "w") as fh:
        json.dump(expected, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main():
    build("fixture200", num_drugs=18, num_cells=6, num_labeled=200, seed=11)
    build("fixture500", num_drugs=30, num_cells=10, num_labeled=500, seed=23)


if __name__ == "__main__":
    main()
