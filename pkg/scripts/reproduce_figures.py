"""Write every dataset (bounds table, figures 1-3, reported scalar values) to a directory.

    python scripts/reproduce_figures.py --out-dir results/
"""
import argparse
import json
import os

from seqbell.bellcore import SharpnessSchedule, critical_schedule_exact, max_pair_values
from seqbell.cli import main
from seqbell.quantum import simulated_sequential_value


def reported_values():
    crit3_local = critical_schedule_exact(3, 1, "local").exact[0]
    crit3_pnc = critical_schedule_exact(3, 2).exact
    rows = {
        "n2_pair2_local": max_pair_values(2, 2, "local")[1],
        "n3_pair2_local_at_0.931": simulated_sequential_value(
            3, SharpnessSchedule.symmetric((round(crit3_local, 3), 1.0))
        ),
        "n3_pair2_pnc": max_pair_values(3, 2, "pnc")[1],
        "n3_pair3_pnc": max_pair_values(3, 3, "pnc")[2],
        "n8_pair3_pnc": max_pair_values(8, 3, "pnc")[2],
        "n3_pnc_criticals": list(crit3_pnc),
    }
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--simulate", action="store_true", help="cross-check figure cells by simulation")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    main(["bounds", "--out", os.path.join(args.out_dir, "bounds.csv")])
    for which in (1, 2, 3):
        argv = ["figure", "--which", str(which), "--out", os.path.join(args.out_dir, f"figure{which}.csv")]
        if args.simulate:
            argv.append("--simulate")
        main(argv)
    with open(os.path.join(args.out_dir, "reported_values.json"), "w") as fh:
        json.dump(reported_values(), fh, indent=2)
    print(f"wrote datasets to {args.out_dir}")
