"""Write transformer-model probe characterizations as probe CSV files.

    python scripts/make_probes.py out_dir [--fmin 10e3 --fmax 1e6 --points 400]
"""
import argparse
from pathlib import Path

import numpy as np

from inductive_coupling.fileio import tabulate_probe, write_probe_file
from inductive_coupling.simulator import synthesize_probe_abcd

# (turns_ratio, magnetizing_l, leakage_l, winding_r)
IIP = (2.0, 1.5e-3, 2e-7, 0.4)
RIP = (0.5, 8e-4, 5e-7, 1.1)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir")
    ap.add_argument("--fmin", type=float, default=10e3)
    ap.add_argument("--fmax", type=float, default=1e6)
    ap.add_argument("--points", type=int, default=400)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    freqs = np.unique(np.append(np.geomspace(args.fmin, args.fmax, args.points), 91.3e3))
    for name, params in (("iip", IIP), ("rip", RIP)):
        probe = tabulate_probe(name.upper(), lambda f: synthesize_probe_abcd(*params, f), freqs)
        write_probe_file(probe, out / f"{name}.csv")
        print(f"wrote {out / f'{name}.csv'} ({len(freqs)} rows)")


if __name__ == "__main__":
    main()
