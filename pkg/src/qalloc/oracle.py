"""Brute-force ground truth for small instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .allocation import Allocation, insert_swaps, total_fidelity
from .circuit import Circuit
from .device import DeviceModel, SwapPathTable
from .errors import InfeasibleAllocation, SearchResourceError

DEFAULT_ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class OracleResult:
    best_allocation: Allocation
    best_fidelity: float
    num_enumerated: int


def count_worst_case_edges(q_l: int, q_p: int) -> int:
    """Edges Dijkstra traverses when every allocation ties: sum of P(q_p, n), n = 1..q_l."""
    if q_l < 1 or q_p < 1:
        raise ValueError("qubit counts must be positive")
    if q_l > q_p:
        raise ValueError(f"{q_l} logical qubits exceed {q_p} physical qubits")
    return sum(math.perm(q_p, n) for n in range(1, q_l + 1))


def exhaustive_allocate(circuit: Circuit, device: DeviceModel, table: SwapPathTable, *,
                        cap: int = DEFAULT_ENUMERATION_CAP) -> OracleResult:
    """Compile every injective full allocation and keep the most reliable one.

    Ties go to the lexicographically smallest allocation (as a tuple of
    physical qubits indexed by logical qubit).
    """
    n_l, n_p = circuit.num_qubits, device.num_qubits
    if n_l > n_p:
        raise InfeasibleAllocation(f"{n_l} logical qubits do not fit on {n_p} physical qubits")
    total = math.perm(n_p, n_l)
    if total > cap:
        raise SearchResourceError(f"{total} allocations exceed the enumeration cap {cap}")
    best, best_f, count = None, -1.0, 0
    for phys in itertools.permutations(range(n_p), n_l):
        count += 1
        alloc = Allocation(enumerate(phys))
        try:
            f = total_fidelity(insert_swaps(circuit, device, alloc, table), device)
        except InfeasibleAllocation:
            continue
        if f > best_f:
            best, best_f = alloc, f
    if best is None:
        raise InfeasibleAllocation(f"no feasible allocation of {circuit.source_name} on {device.name}")
    return OracleResult(best, best_f, count)
