"""``tmcm-obf``: generate, simulate, attack and analyse obfuscated TMCM blocks."""
from __future__ import annotations

import argparse
import json
import os
import re
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .analysis import wrong_key_sweep
from .attack import AttackLimits, lock_random, sat_attack, verify_recovered_key
from .core import ConstantError, ConstantSet
from .decoy import POLICIES, DecoyPlan, DecoySpaceExhausted, assign_decoys, correct_key, plain_plan
from .netlist.bench import read_bench, write_bench
from .netlist.gates import stats as gate_stats
from .netlist.lower import lower_to_gates
from .netlist.verilog import emit_behavioral, emit_testbench
from .sim import Oracle, verify_correct_key
from .tmcm.arch import ARCHITECTURES, build, build_tmcm_sa, output_width, global_order, tables_json

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_TIMEOUT = 0, 1, 2, 3
ARTIFACTS = ("design.v", "testbench.v", "plan.json", "tables.json", "netlist.bench", "stats.json")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_constants(path: str | os.PathLike) -> list[int]:
    """One signed decimal per line; ``#`` starts a comment."""
    out = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(int(line, 10))
        except ValueError:
            raise UsageError(f"{path}:{ln}: not a signed decimal: {line!r}") from None
    if not out:
        raise UsageError(f"{path}: no constants")
    return out


def parse_slots(text: str | None) -> list[list[int]] | None:
    if not text:
        return None
    try:
        return [[int(v) for v in grp.split(",")] for grp in text.split(";")]
    except ValueError:
        raise UsageError(f"bad --slots value {text!r}") from None


def parse_duration(text: str) -> float:
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+)\s*(ms|s|m|h)?\s*", str(text))
    if not m:
        raise UsageError(f"bad duration {text!r}")
    scale = {"ms": 1e-3, "s": 1, "m": 60, "h": 3600, None: 1}[m.group(2)]
    return float(m.group(1)) * scale


def parse_key(text: str, plan: DecoyPlan):
    if text == "correct":
        return correct_key(plan)
    t = text.strip().lower()
    try:
        if t.startswith("0b"):
            v = int(t[2:], 2)
        else:
            v = int(t[2:] if t.startswith("0x") else t, 16)
        return plan.key_from_int(v)
    except ValueError as e:
        raise UsageError(f"malformed key {text!r}: {e}") from None


def _seed(value: int | None, required: bool) -> int | None:
    if value is not None:
        return value
    env = os.environ.get("TMCM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"TMCM_SEED={env!r} is not an integer") from None
    if required:
        raise UsageError("a seed is required (--seed or TMCM_SEED)")
    return 0


@dataclass
class JobConfig:
    constants: str
    p: int
    arch: str = "tmcm-mul"
    policy: str = "hamming-lsb"
    ibw: int = 8
    seed: int = 0
    out: str = "out"
    slots: list[list[int]] | None = None
    values: list[int] = field(default_factory=list, repr=False)

    def validate(self) -> None:
        if self.arch not in ARCHITECTURES:
            raise UsageError(f"unknown architecture {self.arch!r}")
        if self.policy not in POLICIES:
            raise UsageError(f"unknown policy {self.policy!r}")
        if self.ibw < 2:
            raise UsageError("ibw must be at least 2")
        if self.p < 1:
            raise UsageError("p must be at least 1")
        self.values = read_constants(self.constants)


def render_artifacts(cfg: JobConfig) -> dict[str, str]:
    """All generated files as text, computed before anything touches disk."""
    try:
        base = ConstantSet(tuple(cfg.values), cfg.ibw)
        plan = assign_decoys(base, cfg.p, cfg.policy, cfg.seed, cfg.slots)
    except (ConstantError, DecoySpaceExhausted, ValueError) as e:
        raise UsageError(str(e)) from None
    if cfg.arch == "tmcm-sa":
        w, enc, st = build_tmcm_sa(plan)
        tables = tables_json(enc, st)
    else:
        w = build(plan, cfg.arch)
        tables = json.dumps({"encoder": None, "select": None, "note": "tmcm-mul has no tables"},
                            indent=2, sort_keys=True) + "\n"
    g = lower_to_gates(w)
    secret = {"SECRET": "holds the correct key and target positions; do not ship"}
    st = {
        "arch": cfg.arch,
        "ibw": cfg.ibw,
        "n": plan.n,
        "p": plan.p,
        "r": plan.r,
        "out_width": output_width(global_order(plan), cfg.ibw),
        "gates": gate_stats(g),
        "word_nodes": len(w.nodes),
    }
    return {
        "design.v": emit_behavioral(w),
        "testbench.v": "// SECRET: embeds the correct key\n"
                       + emit_testbench(w, plan.targets, correct_key(plan).bits),
        "plan.json": json.dumps({**secret, **plan.to_dict()}, indent=2, sort_keys=True) + "\n",
        "tables.json": tables,
        "netlist.bench": write_bench(g),
        "stats.json": json.dumps(st, indent=2, sort_keys=True) + "\n",
    }


def write_atomic(out: Path, files: dict[str, str]) -> None:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".tmcm-", dir=out.parent))
    try:
        for name, text in files.items():
            (tmp / name).write_text(text)
        if not out.exists():
            os.replace(tmp, out)
            return
        for name in files:
            os.replace(tmp / name, out / name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def cmd_gen(cfg: JobConfig) -> int:
    cfg.validate()
    files = render_artifacts(cfg)
    write_atomic(Path(cfg.out), files)
    st = json.loads(files["stats.json"])
    print(f"wrote {len(files)} artifacts to {cfg.out}: {cfg.arch}, n={st['n']}, p={st['p']}, "
          f"{st['gates']['gate_count']} gates")
    return EXIT_OK


def load_design(d: str | os.PathLike):
    d = Path(d)
    missing = [a for a in ("plan.json", "netlist.bench", "stats.json") if not (d / a).exists()]
    if missing:
        raise UsageError(f"{d}: missing {', '.join(missing)}")
    plan = DecoyPlan.from_dict({k: v for k, v in json.loads((d / "plan.json").read_text()).items()
                                if k != "SECRET"})
    g = read_bench((d / "netlist.bench").read_text(), name="tmcm")
    st = json.loads((d / "stats.json").read_text())
    return plan, g, st


def cmd_sim(design: str, key: str = "correct", vectors: str = "auto", seed: int = 0) -> int:
    plan, g, _ = load_design(design)
    k = parse_key(key, plan)
    if vectors not in ("auto", "exhaustive"):
        try:
            vectors = int(vectors)
        except ValueError:
            raise UsageError(f"bad --vectors {vectors!r}") from None
    rep = verify_correct_key(g, plan, vectors, seed, key=k)
    print(f"key {k}: {rep}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_attack(design: str, time_limit: float = 600.0, dip_limit: int = 10_000,
               lock: str | None = None, p: int = 16, seed: int = 0, out: str | None = None) -> int:
    plan, g, st = load_design(design)
    if lock == "rand":
        plain = lower_to_gates(build(plain_plan(plan.base), st["arch"]))
        target = lock_random(plain, p, seed)
        oracle = Oracle(plain, [])
    elif lock in (None, "none"):
        target = g
        oracle = Oracle(g, correct_key(plan).bits)
    else:
        raise UsageError(f"unknown --lock {lock!r}")
    res = sat_attack(target, oracle, AttackLimits(time_limit, dip_limit))
    summary = res.to_dict()
    code = EXIT_OK
    if res.status == "KeyFound":
        chk = verify_recovered_key(target, oracle, res.key, seed=seed)
        summary["verified"] = chk.ok
        summary["verify_mode"] = chk.mode
        if lock in (None, "none"):
            summary["recovered_constants"] = plan.decode(plan.key_from_int(int(res.key_string, 2)))
        if not chk.ok:
            summary["witness"] = chk.witness
            code = EXIT_VERIFY
    else:
        code = EXIT_TIMEOUT
    dest = Path(out or design)
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "attack.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    (dest / "attack_log.jsonl").write_text(res.log_jsonl())
    line = f"{res.status}: {res.dip_count} DIPs in {res.wall_time:.2f}s"
    if res.key is not None:
        line += f", key {res.key_string}"
    if "recovered_constants" in summary:
        line += f", constants {summary['recovered_constants']}"
    print(line)
    return code


def cmd_analyze(design: str, wrong_keys: int = 100, seed: int = 0, out: str | None = None) -> int:
    plan, _, _ = load_design(design)
    try:
        sw = wrong_key_sweep(plan, wrong_keys, seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    dest = Path(out or design)
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "response.csv").write_text(sw.to_csv())
    (dest / "metrics.json").write_text(json.dumps(sw.metrics_dict(), indent=2, sort_keys=True) + "\n")
    devs = [m["max_abs_dev"] for m in sw.metrics]
    msg = f"{1 + len(devs)} series written"
    if devs:
        msg += f"; min/max of max_abs_dev over wrong keys: {min(devs):.6g}/{max(devs):.6g}"
    print(msg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tmcm-obf", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an obfuscated design")
    g.add_argument("--constants", required=True, help="file with one signed decimal per line")
    g.add_argument("--p", type=int, required=True, help="number of key bits")
    g.add_argument("--arch", default="tmcm-mul", choices=ARCHITECTURES)
    g.add_argument("--policy", default="hamming-lsb", choices=POLICIES)
    g.add_argument("--ibw", type=int, default=8)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.add_argument("--slots", help='pin mux placement, e.g. "15,12,13,9;19,22,21,23"')

    s = sub.add_parser("sim", help="check a design against its targets")
    s.add_argument("design")
    s.add_argument("--key", default="correct", help='"correct" or a hex key (k0 is the MSB)')
    s.add_argument("--vectors", default="auto", help="count, 'exhaustive' or 'auto'")
    s.add_argument("--seed", type=int)

    a = sub.add_parser("attack", help="run the SAT attack against a design")
    a.add_argument("design")
    a.add_argument("--time-limit", default="600", help="e.g. 30, 1s, 10m")
    a.add_argument("--dip-limit", type=int, default=10_000)
    a.add_argument("--lock", choices=("none", "rand"), default="none",
                   help="rand: attack the unobfuscated block locked with --p XOR/XNOR gates")
    a.add_argument("--p", type=int, default=16)
    a.add_argument("--seed", type=int)
    a.add_argument("--out")

    z = sub.add_parser("analyze", help="frequency responses under wrong keys")
    z.add_argument("design")
    z.add_argument("--wrong-keys", type=int, default=100)
    z.add_argument("--seed", type=int)
    z.add_argument("--out")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "gen":
            cfg = JobConfig(args.constants, args.p, args.arch, args.policy, args.ibw,
                            _seed(args.seed, True), args.out, parse_slots(args.slots))
            return cmd_gen(cfg)
        if args.cmd == "sim":
            return cmd_sim(args.design, args.key, args.vectors, _seed(args.seed, False))
        if args.cmd == "attack":
            return cmd_attack(args.design, parse_duration(args.time_limit), args.dip_limit,
                              args.lock, args.p, _seed(args.seed, False), args.out)
        return cmd_analyze(args.design, args.wrong_keys, _seed(args.seed, False), args.out)
    except (UsageError, FileNotFoundError) as e:
        print(f"tmcm-obf: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
