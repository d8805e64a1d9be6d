"""ISCAS-style ``.bench`` netlists, the format logic-locking tools exchange."""
from __future__ import annotations

import re

from .gates import GateNetlist
from .verilog import classify_inputs

_LINE = re.compile(r"^\s*(\S+)\s*=\s*([A-Za-z0-9_]+)\s*(?:\((.*)\))?\s*$")


def write_bench(g: GateNetlist) -> str:
    lines = [f"# {g.name}",
             f"# {len(g.inputs)} inputs ({len(g.key_inputs)} key), {len(g.outputs)} outputs, "
             f"{len(g.gates)} gates"]
    lines += [f"INPUT({n})" for n in g.inputs]
    lines += [f"OUTPUT({n})" for n in g.outputs]
    for net, (typ, fi) in g.gates.items():
        if typ == "CONST0":
            lines.append(f"{net} = gnd")
        elif typ == "CONST1":
            lines.append(f"{net} = vdd")
        else:
            lines.append(f"{net} = {typ}({', '.join(fi)})")
    return "\n".join(lines) + "\n"


def read_bench(text: str, name: str = "bench") -> GateNetlist:
    """Parse a bench netlist; inputs named ``k_*``/``keyinput*`` are key bits.

    Gates may appear in any order; they are re-sorted topologically.
    """
    inputs, outputs = [], []
    raw: dict[str, tuple[str, tuple[str, ...]]] = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^(INPUT|OUTPUT)\s*\(\s*(\S+?)\s*\)$", line, re.I)
        if m:
            (inputs if m.group(1).upper() == "INPUT" else outputs).append(m.group(2))
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {ln}: cannot parse {line!r}")
        net, typ, args = m.group(1), m.group(2).upper(), m.group(3)
        if typ in ("GND", "CONST0", "ZERO"):
            raw[net] = ("CONST0", ())
        elif typ in ("VDD", "CONST1", "ONE"):
            raw[net] = ("CONST1", ())
        else:
            if typ == "BUFF":
                typ = "BUF"
            fi = tuple(a.strip() for a in (args or "").split(",") if a.strip())
            raw[net] = (typ, fi)
    gates: dict[str, tuple[str, tuple[str, ...]]] = {}
    done = set(inputs)
    pending = dict(raw)
    while pending:
        progressed = False
        for net in list(pending):
            typ, fi = pending[net]
            if all(f in done for f in fi):
                gates[net] = (typ, fi)
                done.add(net)
                del pending[net]
                progressed = True
        if not progressed:
            raise ValueError(f"combinational loop or undriven nets near {sorted(pending)[:5]}")
    data, sels, keys = classify_inputs(inputs)
    g = GateNetlist(data, sels, keys, gates, outputs, name)
    g.validate()
    return g
