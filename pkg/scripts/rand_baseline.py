"""Random XOR/XNOR locking of the unobfuscated block, attacked for reference.

    python scripts/rand_baseline.py --p 8 16 32 --seeds 3
"""
import argparse
import csv
import sys

from tmcmobf.attack import AttackLimits, lock_random, sat_attack, verify_recovered_key
from tmcmobf.core import ConstantSet
from tmcmobf.decoy import plain_plan
from tmcmobf.netlist.lower import lower_to_gates
from tmcmobf.sim import Oracle
from tmcmobf.tmcm.arch import ARCHITECTURES, build


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--constants", type=int, nargs="+", default=[13, 23])
    ap.add_argument("--ibw", type=int, default=8)
    ap.add_argument("--p", type=int, nargs="+", default=[8, 16])
    ap.add_argument("--arch", nargs="+", default=list(ARCHITECTURES))
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--time-limit", type=float, default=600)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout)
    out.writerow(["arch", "ibw", "p", "seed", "status", "dips", "seconds", "verified"])
    for arch in args.arch:
        plain = lower_to_gates(build(plain_plan(ConstantSet(tuple(args.constants), args.ibw)), arch))
        oracle = Oracle(plain, [])
        for p in args.p:
            for seed in range(args.seeds):
                locked = lock_random(plain, p, seed)
                res = sat_attack(locked, oracle, AttackLimits(args.time_limit))
                ok = bool(verify_recovered_key(locked, oracle, res.key)) if res.key is not None else ""
                out.writerow([arch, args.ibw, p, seed, res.status, res.dip_count, f"{res.wall_time:.3f}", ok])
                sys.stdout.flush()


if __name__ == "__main__":
    main()
