"""Zero-phase amplitude of an obfuscated filter under sampled wrong keys.

Writes the long-format CSV (key_id 0 is the correct key) and per-key
deviation metrics next to it.

    python scripts/response_sweep.py --taps 15 --p 30 --wrong-keys 100 --out sweep
"""
import argparse
import json
import random
from pathlib import Path

from tmcmobf.analysis import wrong_key_sweep
from tmcmobf.core import ConstantSet
from tmcmobf.decoy import assign_decoys


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--taps", type=int, default=15)
    ap.add_argument("--p", type=int, default=30)
    ap.add_argument("--ibw", type=int, default=10)
    ap.add_argument("--wrong-keys", type=int, default=100)
    ap.add_argument("--seed", type=int, default=8)
    ap.add_argument("--out", default="sweep")
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    h = rng.sample([v for v in range(-300, 300) if v], args.taps)
    plan = assign_decoys(ConstantSet(tuple(h), args.ibw), args.p, seed=args.seed)
    sw = wrong_key_sweep(plan, args.wrong_keys, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "response.csv").write_text(sw.to_csv())
    (out / "metrics.json").write_text(json.dumps(sw.metrics_dict(), indent=2, sort_keys=True) + "\n")
    devs = sorted(m["max_abs_dev"] for m in sw.metrics)
    print(f"h = {h}")
    if devs:
        print(f"max_abs_dev over {len(devs)} wrong keys: min {devs[0]:.4g}, "
              f"median {devs[len(devs) // 2]:.4g}, max {devs[-1]:.4g}")
    print(f"wrote {out / 'response.csv'} and {out / 'metrics.json'}")


if __name__ == "__main__":
    main()
