#!/usr/bin/env python3
"""Per-relay usage counts and fairness for both policies on the default cell.

Shows how many users each policy routes through each relay, which drives
the relay fairness index.
"""
import argparse
import dataclasses

import numpy as np

from relaysched import ScenarioConfig, jain_index, run
from relaysched.cli import parse_seeds
from relaysched.engine import BOTH_POLICIES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--slots", type=int, default=1000)
    ap.add_argument("--seeds", default="1..5")
    args = ap.parse_args()
    sc = dataclasses.replace(ScenarioConfig(), num_slots=args.slots)
    K, M = sc.topology.num_relays, sc.topology.num_users
    for p in BOTH_POLICIES:
        for seed in parse_seeds(args.seeds):
            res = run(sc, seed, p)
            uses = np.zeros(K, dtype=int)
            for rec in res.records:
                for a in rec.allocation.assignments:
                    if not a.mode.is_direct:
                        uses[a.mode.relay] += 1
            share = uses.sum() / (M * sc.num_slots)
            print(f"{p.value:8s} seed {seed:3d} relayed share {share:.3f} uses {uses.tolist()} "
                  f"jain(uses) {jain_index(uses):.6f} jain_relays {res.summary.jain_relays:.6f}")


if __name__ == "__main__":
    main()
