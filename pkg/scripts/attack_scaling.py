"""SAT attack cost on an obfuscated block as ibw and p grow.

    python scripts/attack_scaling.py --ibw 8 12 16 --p 4 6 --time-limit 120
"""
import argparse
import csv
import sys

from tmcmobf.attack import AttackLimits, sat_attack, verify_recovered_key
from tmcmobf.core import ConstantSet
from tmcmobf.decoy import assign_decoys, correct_key
from tmcmobf.netlist.gates import stats
from tmcmobf.netlist.lower import lower_to_gates
from tmcmobf.sim import Oracle
from tmcmobf.tmcm.arch import ARCHITECTURES, build


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--constants", type=int, nargs="+", default=[13, 23])
    ap.add_argument("--ibw", type=int, nargs="+", default=[8, 12, 16])
    ap.add_argument("--p", type=int, nargs="+", default=[4])
    ap.add_argument("--arch", nargs="+", default=list(ARCHITECTURES))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--time-limit", type=float, default=600)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout)
    out.writerow(["arch", "ibw", "p", "gates", "status", "dips", "seconds", "conflicts", "verified", "constants"])
    for arch in args.arch:
        for p in args.p:
            for ibw in args.ibw:
                plan = assign_decoys(ConstantSet(tuple(args.constants), ibw), p, seed=args.seed)
                w = build(plan, arch)
                g = lower_to_gates(w)
                oracle = Oracle(w, correct_key(plan))
                res = sat_attack(g, oracle, AttackLimits(args.time_limit))
                ok, consts = "", ""
                if res.key is not None:
                    ok = bool(verify_recovered_key(g, oracle, res.key))
                    consts = " ".join(map(str, plan.decode(plan.key_from_int(int(res.key_string, 2)))))
                out.writerow([arch, ibw, p, stats(g)["gate_count"], res.status, res.dip_count,
                              f"{res.wall_time:.3f}", res.stats.get("conflicts", ""), ok, consts])
                sys.stdout.flush()


if __name__ == "__main__":
    main()
