"""Particle-level parallelism with all slow particles packed into one static block.

Writes imbalance.csv (mode, workers, median_wall_ns, busy_max_over_mean) into --out.
"""
import argparse
import csv
import statistics
from pathlib import Path

from resoscan import synth
from resoscan.domain import SearchConfig
from resoscan.executor import ExecutionMode, run_corpus_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--fast", type=int, default=24)
    ap.add_argument("--slow", type=int, default=8)
    ap.add_argument("--pmax", type=int, default=30)
    ap.add_argument("--steps", type=int, default=9629)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("out/static_imbalance"))
    args = ap.parse_args()

    eph = synth.gen_ephemeris(args.steps, args.seed)
    fast = [synth.gen_rejectable(f"fast-{i}", eph, i) for i in range(args.fast)]
    slow = [synth.gen_nonresonant(f"slow-{i}", eph, 100 + i, args.pmax) for i in range(args.slow)]
    ordered = fast + slow
    cfg = SearchConfig(pmax=args.pmax, workers=args.workers)
    rows = []
    for mode in (ExecutionMode.particles_static(args.workers),
                 ExecutionMode.particles_dynamic(args.workers)):
        reports = [run_corpus_report(ordered, eph, cfg, mode) for _ in range(args.repeats)]
        wall = statistics.median(r.wall_ns for r in reports)
        imbalance = statistics.median(r.imbalance for r in reports)
        rows.append((mode.kind, mode.workers, int(wall), imbalance))
        print(f"{mode.kind:18s} wall {wall / 1e9:.3f}s  busy max/mean {imbalance:.2f}")
    print(f"static / dynamic = {rows[0][2] / rows[1][2]:.2f}x")
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "imbalance.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode", "workers", "median_wall_ns", "busy_max_over_mean"])
        w.writerows((m, wk, ns, f"{b:.4f}") for m, wk, ns, b in rows)


if __name__ == "__main__":
    main()
