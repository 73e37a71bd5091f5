"""Rate-coverage curves for the default four-band plan in UMi.

Writes coverage.csv and crossovers.csv and prints the dominance sequence.

    python3 scripts/rate_coverage.py --drops 100000 --visibility LoS
"""

import argparse
import time
from pathlib import Path

from fr3sim.coverage import (
    DropScenario,
    coverage_at,
    coverage_csv,
    crossover_points,
    crossovers_csv,
    resolve_bands,
    run_rate_coverage,
)
from fr3sim.link import LinkConfig
from fr3sim.registry import DEFAULT_BAND_PLAN, DEFAULT_TABLE


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--drops", type=int, default=100_000)
    ap.add_argument("--visibility", choices=["LoS", "NLoS"], default="LoS")
    ap.add_argument("--radius", type=float, default=500.0, help="cell radius in m")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--min-run", type=int, default=20, help="flicker filter for the printed sequence")
    ap.add_argument("--out", default="out/rate_coverage")
    args = ap.parse_args()

    bands = resolve_bands(DEFAULT_TABLE, DEFAULT_BAND_PLAN, "UMi", args.visibility)
    sc = DropScenario(bands, LinkConfig(), visibility=args.visibility, cell_radius_m=args.radius,
                      n_drops=args.drops, seed=args.seed)
    t0 = time.perf_counter()
    res = run_rate_coverage(sc, workers=args.workers)
    dt = time.perf_counter() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "coverage.csv").write_text(coverage_csv(res))
    (out / "crossovers.csv").write_text(crossovers_csv(res))

    print(f"{args.drops} drops, UMi {args.visibility}, {dt:.2f} s")
    for rate in (100.0, 500.0, 1000.0, 2000.0, 3000.0):
        cells = ", ".join(f"{b} {coverage_at(res, b, rate):.3f}" for b in res.labels)
        print(f"  coverage at {rate:8.1f} Mbps: {cells}")
    print(f"raw crossovers: {len(res.crossovers)}")
    for c in crossover_points(res, min_run=args.min_run):
        print(f"  {c.band_below} -> {c.band_above} at {c.rate_mbps:.1f} Mbps")
    print(f"wrote {out}/coverage.csv and {out}/crossovers.csv")


if __name__ == "__main__":
    main()
