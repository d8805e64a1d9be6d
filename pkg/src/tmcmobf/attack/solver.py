"""A small conflict-driven clause-learning SAT solver.

Two watched literals per clause, first-UIP learning with local
minimisation, VSIDS branching over a lazy heap, phase saving, Luby
restarts and LBD-based deletion of learnt clauses.  Clauses may be added
between calls and a call may carry assumption literals, which is all the
attack loop needs.  Everything is deterministic.

Internally literal ``2*v`` is ``v`` and ``2*v + 1`` is ``-v``.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Sequence

from .cnf import CNF


def luby(i: int) -> int:
    """``i``-th element (from 0) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    restart_base = 100

    def __init__(self):
        self.nvars = 0
        self.val = [0, 0]
        self.level = [0]
        self.reason: list = [None]
        self.activity = [0.0]
        self.phase = [1]
        self.seen = [0]
        self.watches: list[list] = [[], []]
        self.learnts: list[list[int]] = []
        self.lbd: dict[int, int] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.var_decay = 0.95
        self.max_learnts = 2000
        self.ok = True
        self.model: list[bool] | None = None
        self.limit_hit: str | None = None
        self.stats = {"conflicts": 0, "decisions": 0, "propagations": 0, "restarts": 0,
                      "learnts": 0, "deleted": 0}

    # -- problem construction -------------------------------------------

    def ensure_vars(self, n: int) -> None:
        while self.nvars < n:
            self.nvars += 1
            self.val += [0, 0]
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.phase.append(1)
            self.seen.append(0)
            self.watches += [[], []]
            heapq.heappush(self.heap, (0.0, self.nvars))

    def add_clause(self, lits: Sequence[int]) -> bool:
        """Add a DIMACS clause; returns False once the formula is unsatisfiable."""
        if not self.ok:
            return False
        self._cancel_until(0)
        self.ensure_vars(max((abs(l) for l in lits), default=0))
        c: list[int] = []
        for l in lits:
            L = 2 * l if l > 0 else -2 * l + 1
            v = self.val[L]
            if v == 1 or (L ^ 1) in c:
                return True
            if v == 0 and L not in c:
                c.append(L)
        if not c:
            self.ok = False
        elif len(c) == 1:
            self._enqueue(c[0], None)
            if self._propagate() is not None:
                self.ok = False
        else:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)
        return self.ok

    def add_cnf(self, cnf: CNF, start: int = 0) -> int:
        """Feed ``cnf.clauses[start:]``; returns the new start index."""
        self.ensure_vars(cnf.nvars)
        for c in cnf.clauses[start:]:
            self.add_clause(c)
        return len(cnf.clauses)

    # -- core -----------------------------------------------------------

    def _enqueue(self, L: int, reason) -> None:
        self.val[L] = 1
        self.val[L ^ 1] = -1
        v = L >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(L)

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        val, reason, phase, act, heap = self.val, self.reason, self.phase, self.activity, self.heap
        start = self.trail_lim[lvl]
        for L in self.trail[start:]:
            v = L >> 1
            val[L] = 0
            val[L ^ 1] = 0
            reason[v] = None
            phase[v] = L & 1
            heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = start

    def _propagate(self):
        val, watches, trail = self.val, self.watches, self.trail
        enqueue = self._enqueue
        props = 0
        while self.qhead < len(trail):
            fl = trail[self.qhead] ^ 1
            self.qhead += 1
            props += 1
            ws = watches[fl]
            keep = []
            n = len(ws)
            i = 0
            while i < n:
                c = ws[i]
                i += 1
                if not c:
                    continue
                if c[0] == fl:
                    c[0] = c[1]
                    c[1] = fl
                first = c[0]
                if val[first] == 1:
                    keep.append(c)
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = fl
                        watches[lk].append(c)
                        break
                else:
                    keep.append(c)
                    if val[first] == -1:
                        keep.extend(ws[i:])
                        watches[fl] = keep
                        self.qhead = len(trail)
                        self.stats["propagations"] += props
                        return c
                    enqueue(first, c)
            watches[fl] = keep
        self.stats["propagations"] += props
        return None

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.nvars + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _rebuild_heap(self) -> None:
        self.heap = [(-self.activity[v], v) for v in range(1, self.nvars + 1) if self.val[2 * v] == 0]
        heapq.heapify(self.heap)

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        dl = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        clause = confl
        while True:
            for q in (clause if p < 0 else clause[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    self._bump(v)
                    seen[v] = 1
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            clause = reason[p >> 1]
            seen[p >> 1] = 0
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause
        out = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or any(not seen[u >> 1] and level[u >> 1] > 0 for u in r[1:]):
                out.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = 0
        bt = 0
        if len(out) > 1:
            best = max(range(1, len(out)), key=lambda t: level[out[t] >> 1])
            out[1], out[best] = out[best], out[1]
            bt = level[out[1] >> 1]
        self.var_inc /= self.var_decay
        return out, bt

    def _reduce_db(self) -> None:
        def locked(c):
            return self.reason[c[0] >> 1] is c and self.val[c[0]] == 1

        ranked = sorted(self.learnts, key=lambda c: (self.lbd[id(c)], len(c)))
        keep, drop = ranked[: len(ranked) // 2], ranked[len(ranked) // 2:]
        self.learnts = keep
        for c in drop:
            if self.lbd[id(c)] <= 2 or locked(c):
                self.learnts.append(c)
                continue
            del self.lbd[id(c)]
            c.clear()
            self.stats["deleted"] += 1
        self.max_learnts = int(self.max_learnts * 1.1)

    def _pick(self) -> int:
        val, heap = self.val, self.heap
        while heap:
            _, v = heapq.heappop(heap)
            if val[2 * v] == 0:
                return 2 * v + self.phase[v]
        return -1

    def _search(self, budget: int, assumptions: list[int], deadline: float | None) -> bool | None:
        conflicts = 0
        stats = self.stats
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                stats["conflicts"] += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = len({self.level[q >> 1] for q in learnt})
                    stats["learnts"] += 1
                    self._enqueue(learnt[0], learnt)
                if deadline is not None and stats["conflicts"] % 64 == 0 and time.monotonic() > deadline:
                    self.limit_hit = "time"
                    return None
                continue
            if conflicts >= budget:
                self._cancel_until(0)
                stats["restarts"] += 1
                return None
            if len(self.learnts) - len(self.trail) >= self.max_learnts:
                self._reduce_db()
            nxt = -1
            while len(self.trail_lim) < len(assumptions):
                a = assumptions[len(self.trail_lim)]
                if self.val[a] == 1:
                    self.trail_lim.append(len(self.trail))
                elif self.val[a] == -1:
                    return False
                else:
                    nxt = a
                    break
            if nxt < 0:
                nxt = self._pick()
                if nxt < 0:
                    self.model = [False] + [self.val[2 * v] == 1 for v in range(1, self.nvars + 1)]
                    return True
                stats["decisions"] += 1
                if deadline is not None and stats["decisions"] % 4096 == 0 and time.monotonic() > deadline:
                    self.limit_hit = "time"
                    return None
            self.trail_lim.append(len(self.trail))
            self._enqueue(nxt, None)

    def solve(self, assumptions: Sequence[int] = (), deadline: float | None = None,
              conflict_limit: int | None = None) -> bool | None:
        """True (model in :attr:`model`), False, or None when a limit stopped the search."""
        self.model = None
        self.limit_hit = None
        if not self.ok:
            return False
        self.ensure_vars(max((abs(l) for l in assumptions), default=0))
        assume = [2 * l if l > 0 else -2 * l + 1 for l in assumptions]
        self._cancel_until(0)
        start = self.stats["conflicts"]
        r = 0
        while True:
            res = self._search(self.restart_base * luby(r), assume, deadline)
            if res is not None:
                self._cancel_until(0)
                return res
            if self.limit_hit:
                self._cancel_until(0)
                return None
            if conflict_limit is not None and self.stats["conflicts"] - start >= conflict_limit:
                self.limit_hit = "conflicts"
                return None
            if deadline is not None and time.monotonic() > deadline:
                self.limit_hit = "time"
                return None
            r += 1

    def value(self, lit: int) -> bool:
        if self.model is None:
            raise RuntimeError("no model")
        return self.model[abs(lit)] == (lit > 0)


@dataclass
class SolveResult:
    status: str  # SAT, UNSAT or UNKNOWN
    model: dict[int, bool] | None = None
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


def sat_solve(cnf: CNF, assumptions: Sequence[int] = (), time_limit: float | None = None,
              conflict_limit: int | None = None) -> SolveResult:
    s = Solver()
    s.add_cnf(cnf)
    deadline = None if time_limit is None else time.monotonic() + time_limit
    r = s.solve(assumptions, deadline, conflict_limit)
    if r is None:
        return SolveResult("UNKNOWN", None, dict(s.stats, limit=s.limit_hit))
    if r is False:
        return SolveResult("UNSAT", None, dict(s.stats))
    return SolveResult("SAT", {v: s.model[v] for v in range(1, cnf.nvars + 1)}, dict(s.stats))
