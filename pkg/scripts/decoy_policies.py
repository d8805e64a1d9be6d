"""Hardware cost and decoy distance under the two decoy policies."""
import argparse
import csv
import random
import sys

from tmcmobf.core import ConstantSet, hamming
from tmcmobf.decoy import POLICIES, DecoySpaceExhausted, assign_decoys
from tmcmobf.netlist.gates import stats
from tmcmobf.netlist.lower import lower_to_gates
from tmcmobf.tmcm.arch import ARCHITECTURES, build


def mean_distance(plan):
    d = [hamming(t, c, plan.base.mbw + 1) for t, ds in zip(plan.targets, plan.decoys) for c in ds]
    return sum(d) / len(d) if d else 0.0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sets", type=int, default=10, help="random constant sets")
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--p", type=int, default=8)
    ap.add_argument("--ibw", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    out = csv.writer(sys.stdout)
    out.writerow(["set", "policy", "arch", "gates", "depth", "mean_decoy_hd"])
    for s in range(args.sets):
        vals = tuple(rng.sample([v for v in range(-127, 128) if v], args.n))
        for policy in POLICIES:
            try:
                plan = assign_decoys(ConstantSet(vals, args.ibw), args.p, policy, seed=s)
            except DecoySpaceExhausted as e:
                print(f"# set {s} {policy}: {e}", file=sys.stderr)
                continue
            for arch in ARCHITECTURES:
                st = stats(lower_to_gates(build(plan, arch)))
                out.writerow([s, policy, arch, st["gate_count"], st["depth"], f"{mean_distance(plan):.3f}"])


if __name__ == "__main__":
    main()
