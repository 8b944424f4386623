"""Feasibility LP against overlap over random density pairs; writes one CSV row per trial."""
import argparse
import csv
import time
from collections import Counter

from ontolab.pbr_checker import theorem_sweep
from ontolab.pbr_scenario import build_scenario, quantum_statistics


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="theorem_sweep.csv")
    args = ap.parse_args()

    stats = quantum_statistics(build_scenario())
    t0 = time.perf_counter()
    recs = theorem_sweep(stats, args.sizes, args.trials, args.seed)
    elapsed = time.perf_counter() - t0

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["size", "trial", "overlap", "status", "contradiction", "residual",
                    "reproduction_error", "pattern_ok", "forcing_agrees"])
        for r in recs:
            w.writerow([r.size, r.trial, repr(r.overlap), r.status, r.contradiction, repr(r.residual),
                        "" if r.reproduction_error is None else repr(r.reproduction_error),
                        r.theorem_pattern_ok, r.forcing_agrees])

    tally = Counter((r.size, r.overlap > 0, r.status) for r in recs)
    for (size, overl, status), n in sorted(tally.items()):
        print(f"L={size:3d} {'overlapping' if overl else 'disjoint':11s} -> {status:10s} x{n}")
    bad = sum(not (r.theorem_pattern_ok and r.forcing_agrees) for r in recs)
    print(f"{len(recs)} trials, {bad} exceptions, {elapsed:.1f} s, rows in {args.out}")


if __name__ == "__main__":
    main()
