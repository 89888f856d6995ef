"""Wavefront wall time of one worst-case non-resonant particle across prefix depths and worker counts.

Writes sweep.csv (depth, workers, median_wall_ns, speedup_vs_1_worker) into --out.
"""
import argparse
import csv
import os
import statistics
from pathlib import Path

from resoscan import synth
from resoscan.domain import SearchConfig
from resoscan.executor import ExecutionMode, run_corpus_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pmax", type=int, default=30)
    ap.add_argument("--steps", type=int, default=9629)
    ap.add_argument("--depths", default="1,2,3,4")
    ap.add_argument("--workers", default=",".join(sorted({"1", str(os.cpu_count() or 1)})))
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("out/prefix_sweep"))
    args = ap.parse_args()

    eph = synth.gen_ephemeris(args.steps, args.seed)
    particle = synth.gen_nonresonant("worst", eph, args.seed, args.pmax)
    depths = [int(v) for v in args.depths.split(",")]
    workers = sorted(int(v) for v in args.workers.split(","))
    rows = []
    for d in depths:
        base = None
        for w in workers:
            cfg = SearchConfig(pmax=args.pmax, workers=w)
            wall = statistics.median(
                run_corpus_report([particle], eph, cfg, ExecutionMode.wavefront(w, d)).wall_ns
                for _ in range(args.repeats))
            base = base or wall
            rows.append((d, w, int(wall), base / wall))
            print(f"depth {d} workers {w:3d}: {wall / 1e9:.3f}s  speedup {base / wall:.2f}x")
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["depth", "workers", "median_wall_ns", "speedup_vs_1_worker"])
        w.writerows((d, wk, ns, f"{s:.4f}") for d, wk, ns, s in rows)


if __name__ == "__main__":
    main()
