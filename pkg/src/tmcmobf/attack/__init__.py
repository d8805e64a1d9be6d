from .cnf import CNF, encode_gates, tseitin_cnf
from .lock import lock_random
from .sat_attack import (AttackLimits, AttackResult, KeyCheck, Miter, build_miter, sat_attack,
                         verify_recovered_key)
from .solver import Solver, SolveResult, sat_solve

__all__ = [
    "CNF", "encode_gates", "tseitin_cnf", "lock_random", "AttackLimits", "AttackResult",
    "KeyCheck", "Miter", "build_miter", "sat_attack", "verify_recovered_key", "Solver",
    "SolveResult", "sat_solve",
]
