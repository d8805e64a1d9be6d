"""Verilog-2001 emission (behavioural and structural) and a structural reader."""
from __future__ import annotations

import re
from typing import Sequence

from .gates import GateNetlist
from .word import WordNetlist


def _lit(v: int, w: int) -> str:
    return f"-{w}'sd{-v}" if v < 0 else f"{w}'sd{v}"


def _decl(w: int, signed: bool) -> str:
    s = "signed " if signed else ""
    return f"{s}[{w - 1}:0] " if w > 1 else s


def _concat(names: Sequence[str]) -> str:
    """Concatenation with the first listed name as LSB."""
    return names[0] if len(names) == 1 else "{" + ", ".join(reversed(names)) + "}"


def emit_behavioral(w: WordNetlist) -> str:
    ibw, m, p, ow = w.ibw, w.m, w.p, w.out_width
    seq = w.is_sequential
    out_name = w.nodes[w.ids("output")[0]].attrs.get("name", "f")
    ports = (["clk", "rst"] if seq else []) + ["x"] + (["i"] if m else []) + (["k"] if p else []) + [out_name]
    lines = [f"module {w.name} ({', '.join(ports)});"]
    if seq:
        lines += ["  input clk;", "  input rst;"]
    lines.append(f"  input  signed [{ibw - 1}:0] x;")
    if m:
        lines.append(f"  input  [{m - 1}:0] i;")
    if p:
        lines.append(f"  input  [{p - 1}:0] k;")
    lines.append(f"  output signed [{ow - 1}:0] {out_name};")
    body: list[str] = []
    name: dict[int, str] = {}
    for idx, nd in enumerate(w.nodes):
        op, a = nd.op, nd.args
        nm = f"n{idx}"
        if op == "x":
            name[idx] = "x"
            continue
        if op == "key":
            name[idx] = f"k[{nd.attrs['index']}]"
            continue
        if op == "sel":
            name[idx] = f"i[{nd.attrs['index']}]"
            continue
        name[idx] = nm
        d = _decl(nd.width, nd.signed)
        if op == "const":
            lines.append(f"  wire {d}{nm} = {_lit(nd.attrs['value'], nd.width)};")
        elif op == "shl":
            lines.append(f"  wire {d}{nm};")
            body.append(f"  assign {nm} = {name[a[0]]} <<< {nd.attrs['amount']};")
        elif op in ("add", "sub", "mul"):
            sym = {"add": "+", "sub": "-", "mul": "*"}[op]
            lines.append(f"  wire {d}{nm};")
            body.append(f"  assign {nm} = {name[a[0]]} {sym} {name[a[1]]};")
        elif op == "addsub":
            lines.append(f"  wire {d}{nm};")
            body.append(f"  assign {nm} = {name[a[2]]} ? {name[a[0]]} - {name[a[1]]} : {name[a[0]]} + {name[a[1]]};")
        elif op in ("mux", "constmux"):
            ns = nd.attrs["nsel"] if op == "mux" else len(a)
            sel = _concat([name[s] for s in a[:ns]])
            if op == "mux":
                items = [name[t] for t in a[ns:]]
            else:
                items = [_lit(v, nd.width) for v in nd.attrs["values"]]
            lines.append(f"  reg  {d}{nm};")
            body.append("  always @* begin")
            body.append(f"    case ({sel})")
            for t, it in enumerate(items[:-1]):
                body.append(f"      {ns}'d{t}: {nm} = {it};")
            body.append(f"      default: {nm} = {items[-1]};")
            body += ["    endcase", "  end"]
        elif op == "table":
            tbl = nd.attrs["table"]
            ins = [name[t] for t in a]
            lines.append(f"  reg  {d}{nm};  // {nd.attrs.get('kind', 'table')}")
            body.append("  always @* begin")
            body.append(f"    casez ({_concat(ins)})")
            for lits, out in tbl.rows:
                pat = "".join(str(lits[t]) if t in lits else "?" for t in reversed(range(tbl.n_inputs)))
                body.append(f"      {tbl.n_inputs}'b{pat}: {nm} = {nd.width}'d{out};")
            body.append(f"      default: {nm} = {nd.width}'d0;")
            body += ["    endcase", "  end"]
        elif op == "bit":
            src = w.nodes[a[0]]
            b = min(nd.attrs["index"], src.width - 1)
            lines.append(f"  wire {nm};")
            body.append(f"  assign {nm} = {name[a[0]]}[{b}];" if src.width > 1 else f"  assign {nm} = {name[a[0]]};")
        elif op == "eqc":
            src = w.nodes[a[0]]
            lines.append(f"  wire {nm};")
            body.append(f"  assign {nm} = ({name[a[0]]} == {src.width}'d{nd.attrs['value']});")
        elif op == "counter":
            mod = nd.attrs["modulo"]
            lines.append(f"  reg  {d}{nm};  // counter 0..{mod - 1}")
            body.append("  always @(posedge clk)")
            body.append(f"    if (rst) {nm} <= 0;")
            body.append(f"    else {nm} <= ({nm} == {mod - 1}) ? 0 : {nm} + 1;")
        elif op == "reg":
            lines.append(f"  reg  {d}{nm};  // {nd.attrs.get('name', '')}")
            body.append("  always @(posedge clk)")
            body.append(f"    if (rst) {nm} <= 0;")
            if len(a) == 2:
                body.append(f"    else if ({name[a[1]]}) {nm} <= {name[a[0]]};")
            else:
                body.append(f"    else {nm} <= {name[a[0]]};")
        elif op == "output":
            body.append(f"  assign {out_name} = {name[a[0]]};")
        else:
            raise ValueError(f"cannot emit node type {op!r}")
    return "\n".join(lines + [""] + body + ["endmodule", ""])


def emit_testbench(w: WordNetlist, targets: Sequence[int], key_bits: Sequence[int],
                   vectors: int = 10_000, seed: int = 1) -> str:
    """Self-checking testbench: correct key, random ``x`` and ``i``."""
    ibw, m, p, ow = w.ibw, w.m, w.p, w.out_width
    n = len(targets)
    cw = max(2, max(abs(c) for c in targets).bit_length() + 1)
    lines = [
        "`timescale 1ns/1ps",
        f"module {w.name}_tb;",
        f"  reg  signed [{ibw - 1}:0] x;",
    ]
    if m:
        lines.append(f"  reg  [{m - 1}:0] i;")
    if p:
        lines.append(f"  reg  [{p - 1}:0] k;")
    lines += [
        f"  wire signed [{ow - 1}:0] f;",
        f"  reg  signed [{cw - 1}:0] c;",
        f"  reg  signed [{ow - 1}:0] expected;",
        "  integer t, errors, seed;",
        "",
        f"  {w.name} dut (.x(x)" + (", .i(i)" if m else "") + (", .k(k)" if p else "") + ", .f(f));",
        "",
    ]
    if m:
        lines += ["  always @* begin", "    case (i)"]
        for t, c in enumerate(targets[:-1]):
            lines.append(f"      {t}: c = {_lit(c, cw)};")
        lines += [f"      default: c = {_lit(targets[-1], cw)};", "    endcase", "  end"]
    else:
        lines.append(f"  always @* c = {_lit(targets[0], cw)};")
    lines += ["", "  initial begin", "    errors = 0;", f"    seed = {seed};"]
    if p:
        kv = "".join(str(b) for b in reversed(key_bits))
        lines.append(f"    k = {p}'b{kv};  // k[0] is the leftmost key bit")
    lines += [
        f"    for (t = 0; t < {vectors}; t = t + 1) begin",
        "      x = $random(seed);",
    ]
    if m:
        lines.append(f"      i = {{$random(seed)}} % {n};")
    lines += [
        "      #1;",
        "      expected = c * x;",
        "      if (f !== expected) begin",
        "        errors = errors + 1;",
        "        if (errors < 10) $display(\"MISMATCH x=%0d i=%0d f=%0d expected=%0d\", x, "
        + ("i" if m else "0") + ", f, expected);",
        "      end",
        "    end",
        "    if (errors == 0) $display(\"PASS\"); else $display(\"FAIL %0d errors\", errors);",
        "    $finish;",
        "  end",
        "endmodule",
        "",
    ]
    return "\n".join(lines)


_PRIM = {"AND": "and", "OR": "or", "NAND": "nand", "NOR": "nor", "XOR": "xor", "XNOR": "xnor",
         "NOT": "not", "BUF": "buf"}


def emit_structural(g: GateNetlist) -> str:
    ports = g.inputs + g.outputs
    lines = [f"module {g.name} ({', '.join(ports)});"]
    for n in g.inputs:
        lines.append(f"  input {n};")
    for n in g.outputs:
        lines.append(f"  output {n};")
    outs = set(g.outputs)
    for net in g.gates:
        if net not in outs:
            lines.append(f"  wire {net};")
    for t, (net, (typ, fi)) in enumerate(g.gates.items()):
        if typ == "CONST0":
            lines.append(f"  assign {net} = 1'b0;")
        elif typ == "CONST1":
            lines.append(f"  assign {net} = 1'b1;")
        else:
            lines.append(f"  {_PRIM[typ]} g{t} ({net}, {', '.join(fi)});")
    lines += ["endmodule", ""]
    return "\n".join(lines)


def emit_verilog(design: WordNetlist | GateNetlist, style: str | None = None) -> str:
    if isinstance(design, GateNetlist):
        if style not in (None, "structural"):
            raise ValueError("gate netlists are emitted structurally")
        return emit_structural(design)
    if style not in (None, "behavioral"):
        raise ValueError("word netlists are emitted behaviourally")
    return emit_behavioral(design)


def classify_inputs(names: Sequence[str]) -> tuple[list[str], list[str], list[str]]:
    keys = [n for n in names if n.startswith("k_") or n.lower().startswith("keyinput")]
    sels = [n for n in names if n.startswith("i_")]
    data = [n for n in names if n not in keys and n not in sels]
    return data, sels, keys


def read_structural(text: str) -> GateNetlist:
    """Parse the structural subset written by :func:`emit_structural`."""
    text = re.sub(r"//.*", "", text)
    mod = re.search(r"module\s+(\w+)", text)
    inputs, outputs = [], []
    gates: dict[str, tuple[str, tuple[str, ...]]] = {}
    prim = {v: k for k, v in _PRIM.items()}
    for stmt in text.split(";"):
        s = " ".join(stmt.split())
        if not s:
            continue
        if s.startswith("module") or s == "endmodule":
            continue
        if s.startswith("endmodule"):
            s = s[len("endmodule"):].strip()
            if not s:
                continue
        head = s.split(" ", 1)[0]
        if head == "input":
            inputs += [t.strip() for t in s[6:].split(",")]
        elif head == "output":
            outputs += [t.strip() for t in s[7:].split(",")]
        elif head == "wire":
            continue
        elif head == "assign":
            m = re.match(r"assign (\S+) = 1'b([01])", s)
            if not m:
                raise ValueError(f"unsupported assign: {s}")
            gates[m.group(1)] = ("CONST1" if m.group(2) == "1" else "CONST0", ())
        elif head in prim:
            m = re.match(r"\w+ \w+ \((.*)\)", s)
            if not m:
                raise ValueError(f"bad gate instance: {s}")
            pins = [t.strip() for t in m.group(1).split(",")]
            gates[pins[0]] = (prim[head], tuple(pins[1:]))
        else:
            raise ValueError(f"unsupported statement: {s}")
    data, sels, keys = classify_inputs(inputs)
    g = GateNetlist(data, sels, keys, gates, outputs, mod.group(1) if mod else "top")
    g.validate()
    return g
