"""Build tests/data/smiles_corpus.tsv from the SMILES sets bundled with RDKit.

Each row records whether RDKit accepts the molecule (sanitized parse) and the
atom and bond counts of its unsanitized graph, which is the graph the C++
parser builds (explicit [H] atoms are kept, implicit hydrogens are not).

Usage: python scripts/freeze_smiles_corpus.py [--count 1000] [--seed 7]
"""

import argparse
import csv
import os
import random

from rdkit import Chem, RDConfig, RDLogger


def read_sources():
    data = RDConfig.RDDataDir
    contrib = RDConfig.RDContribDir
    out = []
    with open(os.path.join(data, "NCI", "first_5K.smi")) as fh:
        out += [line.split()[0] for line in fh if line.strip()]
    with open(os.path.join(contrib, "FreeWilson", "data", "CHEMBL2321810.smi")) as fh:
        out += [line.split()[0] for line in fh if line.strip() and not line.startswith("smiles")]
    with open(os.path.join(data, "Pains", "test_data", "wehi_mols.csv")) as fh:
        out += [row[0] for row in csv.reader(fh) if row]
    return out


# Stereo, isotope, charge, multi-component and %nn cases the bundled sets lack.
CURATED = [
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "CC(=O)OC1=CC=CC=C1C(=O)O",
    "C[C@H](N)C(=O)O",
    "N[C@@H](Cc1ccccc1)C(=O)O",
    "C/C=C/C",
    "F/C=C\\F",
    "[2H]C([2H])([2H])O",
    "[13CH4]",
    "[NH4+].[Cl-]",
    "[Na+].[O-]C(=O)c1ccccc1",
    "C%10CCCCC%10",
    "C%12CC%13CCC%12C%13",
    "c1cc2ccc3cccc4ccc(c1)c2c34",
    "O=C(O)C[C@@H](O)C(=O)O",
    "CC(C)C[C@H](NC(=O)[C@@H](Cc1ccccc1)NC(=O)c1cnccn1)B(O)O",
    "C[C@]12CC[C@H]3[C@@H](CCc4cc(O)ccc43)[C@@H]1CC[C@@H]2O",
    "CC1=C2[C@@]([C@]([C@H]([C@@H]3[C@]4([C@H](OC4)C[C@@H]([C@]3(C(=O)[C@@H]2OC(=O)C)C)O)OC(=O)C)OC(=O)c5ccccc5)(C[C@@H]1OC(=O)[C@H](O)[C@@H](NC(=O)c6ccccc6)c7ccccc7)O)(C)C",
    "N.N.Cl[Pt]Cl",
    "Nc1nc(=O)n([C@@H]2O[C@H](CO)[C@@H](O)C2(F)F)cc1",
    "C=CC(=O)Nc1cc2c(Nc3ccc(F)c(Cl)c3)ncnc2cc1OCCCN1CCOCC1",
    "CS(=O)(=O)CCNCc1ccc(o1)-c1ccc2ncnc(Nc3ccc(OCc4cccc(F)c4)c(Cl)c3)c2c1",
    "O=C1c2c(O)cccc2C(=O)c2c(O)c3c(c(O)c21)C[C@@](O)(C(=O)CO)C[C@@H]3O[C@H]1C[C@H](N)[C@H](O)[C@H](C)O1",
    "[O-][N+](=O)c1ccc(cc1)C=O",
    "C1CC[C@@H]2CCCC[C@H]2C1",
    "OC[C@H]1O[C@@H](O)[C@H](O)[C@@H](O)[C@@H]1O",
    "CC(C)(C)c1ccc(cc1)[S@@](=O)C",
    "[H][C@@]12CC[C@H](C)[C@]1([H])CC2",
    "Cl\\C=C/Br",
    "C1=CC=CC=C1.O",
    "[Fe+2].[O-]S(=O)(=O)[O-]",
    "CC#N",
    "C1CC1C#CC2CC2",
    "c1ccc2c(c1)[nH]c1ccccc12",
    "O=c1[nH]cnc2[nH]ncc12",
    "Brc1ccc(I)cc1",
    "P(=O)(O)(O)OCC",
    "B(O)(O)c1ccccc1",
    "[Se]=C=[Se]",
    "C[Si](C)(C)C",
    "CCCCCCCCCCCCCCCC(=O)OC[C@H](COP(=O)([O-])OCC[N+](C)(C)C)OC(=O)CCCCCCCCCCCCCCC",
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "data", "smiles_corpus.tsv"))
    args = ap.parse_args()
    RDLogger.DisableLog("rdApp.*")

    pool = sorted(set(read_sources()))
    rng = random.Random(args.seed)
    pool = [smi for smi in pool if smi not in CURATED]
    picked = CURATED + rng.sample(pool, args.count - len(CURATED))

    with open(args.out, "w", newline="") as fh:
        fh.write("smiles\treference_accepts\tnum_atoms\tnum_bonds\n")
        for smi in picked:
            sanitized = Chem.MolFromSmiles(smi)
            raw = Chem.MolFromSmiles(smi, sanitize=False)
            if sanitized is None or raw is None:
                fh.write(f"{smi}\t0\t-1\t-1\n")
            else:
                fh.write(f"{smi}\t1\t{raw.GetNumAtoms()}\t{raw.GetNumBonds()}\n")


if __name__ == "__main__":
    main()
