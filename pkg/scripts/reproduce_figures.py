#!/usr/bin/env python3
"""Write plot-ready CSVs for the throughput-vs-time and Jain-vs-RS/MS figures.

    python scripts/reproduce_figures.py --out figures --slots 1000 --seeds 1..20

fig2_throughput.csv   slot, seed-averaged system capacity per policy
fig3_relays.csv       sweep over the number of relays (1..6)
fig4_users.csv        sweep over the number of users (2..10)
"""
import argparse
import dataclasses
from pathlib import Path

import numpy as np

from relaysched import ScenarioConfig, run_batch, sweep
from relaysched.cli import SWEEP_HEADER, _csv_text, parse_scenario, parse_seeds, sweep_rows, write_outputs
from relaysched.engine import BOTH_POLICIES


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config")
    ap.add_argument("--slots", type=int, default=1000)
    ap.add_argument("--seeds", default="1..20")
    ap.add_argument("--sweep-slots", type=int, default=300)
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()

    base = parse_scenario(Path(args.config).read_text()) if args.config else ScenarioConfig()
    sc = dataclasses.replace(base, num_slots=args.slots, seeds=parse_seeds(args.seeds),
                             policies=BOTH_POLICIES)

    series = {}
    for p in BOTH_POLICIES:
        batch = run_batch(sc, p)
        caps = np.array([r.summary.per_slot_capacity for r in batch.results])
        series[p] = caps.mean(axis=0)
        agg = batch.aggregate
        print(f"{p.value:8s} mean capacity {agg['mean_system_capacity']['mean']:.6g} bit/s, "
              f"jain users {agg['jain_users']['mean']:.6f}, jain relays {agg['jain_relays']['mean']:.6f}")
    fig2 = _csv_text(["slot"] + [f"{p.value}_bps" for p in BOTH_POLICIES],
                     [[t] + [float(series[p][t]) for p in BOTH_POLICIES] for t in range(sc.num_slots)])

    short = dataclasses.replace(sc, num_slots=args.sweep_slots)
    fig3 = sweep_rows(sweep(short, "num_relays", [1, 2, 3, 4, 5, 6]))
    fig4 = sweep_rows(sweep(short, "num_users", [2, 4, 6, 8, 10]))
    write_outputs(Path(args.out), {
        "fig2_throughput.csv": fig2,
        "fig3_relays.csv": _csv_text(SWEEP_HEADER, [["relays", *r[1:]] for r in fig3]),
        "fig4_users.csv": _csv_text(SWEEP_HEADER, [["users", *r[1:]] for r in fig4]),
    })
    print(f"wrote figure data to {args.out}/")


if __name__ == "__main__":
    main()
