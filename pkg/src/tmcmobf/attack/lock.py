"""Random XOR/XNOR key-gate insertion, the classic baseline locking."""
from __future__ import annotations

import random

from ..netlist.gates import GateNetlist

_LOCKABLE = ("AND", "OR", "NAND", "NOR", "XOR", "XNOR", "NOT")


def lock_random(g: GateNetlist, p: int, seed: int = 0) -> GateNetlist:
    """Cut ``p`` random logic nets with key gates.

    A key bit of 0 gets an XOR gate, a key bit of 1 an XNOR, so the correct
    key (stored in ``meta['correct_key']``, appended after any existing key
    inputs) restores the original function.  New key inputs are named
    ``keyinput<t>``.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    old_key = list(g.meta.get("correct_key", []))
    if p == 0:
        return g.copy()
    rng = random.Random(seed)
    cand = [n for n, (typ, _) in g.gates.items() if typ in _LOCKABLE]
    if len(cand) < p:
        raise ValueError(f"only {len(cand)} lockable nets, {p} key bits requested")
    chosen = rng.sample(cand, p)
    bits = [rng.randint(0, 1) for _ in range(p)]
    base = len(g.key_inputs)
    taken = set(g.inputs) | set(g.gates)
    new_keys = []
    for t in range(p):
        nm = f"keyinput{base + t}"
        while nm in taken:
            nm = "_" + nm
        new_keys.append(nm)
    cut = {net: t for t, net in enumerate(chosen)}
    gates: dict[str, tuple[str, tuple[str, ...]]] = {}
    for net, gate in g.gates.items():
        if net in cut:
            t = cut[net]
            pre = f"{net}_pre"
            while pre in taken:
                pre += "_"
            taken.add(pre)
            gates[pre] = gate
            gates[net] = ("XNOR" if bits[t] else "XOR", (pre, new_keys[t]))
        else:
            gates[net] = gate
    meta = dict(g.meta, correct_key=old_key + bits, locked_nets=chosen)
    out = GateNetlist(list(g.data_inputs), list(g.select_inputs), list(g.key_inputs) + new_keys,
                      gates, list(g.outputs), f"{g.name}_rand{p}", meta)
    out.validate()
    return out
