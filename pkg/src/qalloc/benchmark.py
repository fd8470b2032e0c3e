"""Simulated stand-in for the hardware benchmark: compile, simulate, tabulate."""

from __future__ import annotations

import csv
import io
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .allocation import Allocation, CompiledCircuit, insert_swaps
from .anneal import AnnealConfig, hybrid_allocate
from .circuit import Circuit
from .device import DeviceModel, SwapPathTable, build_swap_table
from .errors import InfeasibleAllocation
from .noise import ErrorReport, simulate_measured_error
from .search import local_allocate

STRATEGIES = ("identity", "random", "local", "hybrid")
CSV_HEADER = ["circuit", "allocator", "qubit", "shots", "errors", "rate"]


@dataclass(frozen=True)
class Strategy:
    name: str
    anneal: AnnealConfig = field(default_factory=AnnealConfig)


def _child_seed(*key: int) -> int:
    return int(np.random.SeedSequence(list(key)).generate_state(1, np.uint64)[0])


def identity_allocation(circuit: Circuit, device: DeviceModel) -> Allocation:
    if circuit.num_qubits > device.num_qubits:
        raise InfeasibleAllocation("circuit does not fit on the device")
    return Allocation({l: l for l in range(circuit.num_qubits)})


def random_allocation(circuit: Circuit, device: DeviceModel, seed: int) -> Allocation:
    if circuit.num_qubits > device.num_qubits:
        raise InfeasibleAllocation("circuit does not fit on the device")
    rng = np.random.default_rng(seed)
    phys = rng.permutation(device.num_qubits)[: circuit.num_qubits]
    return Allocation({l: int(p) for l, p in enumerate(phys)})


def compile_with(strategy: Strategy, circuit: Circuit, device: DeviceModel,
                 table: SwapPathTable, seed: int = 0) -> CompiledCircuit:
    """Compile ``circuit`` with a named allocation strategy."""
    name = strategy.name
    if name == "identity":
        return insert_swaps(circuit, device, identity_allocation(circuit, device), table)
    if name == "random":
        return insert_swaps(circuit, device, random_allocation(circuit, device, seed), table)
    if name in ("local", "local_search"):
        return local_allocate(circuit, device, table, max_frontier=strategy.anneal.max_frontier)[0]
    if name == "hybrid":
        return hybrid_allocate(circuit, device, table, strategy.anneal)[0]
    raise ValueError(f"unknown allocation strategy {name!r}")


def _task(args) -> ErrorReport:
    ci, si, circuit, device, table, strategy, shots, seed = args
    compiled = compile_with(strategy, circuit, device, table, _child_seed(seed, ci, si, 0))
    return simulate_measured_error(compiled, device, shots, _child_seed(seed, ci, si, 1))


def run_benchmark(circuits: list[Circuit], device: DeviceModel, strategies: list[Strategy],
                  shots: int = 1024, seed: int = 0, *, jobs: int = 1,
                  table: SwapPathTable | None = None) -> dict[tuple[str, str], ErrorReport]:
    """Error report per (circuit name, strategy name), in circuit-then-strategy order.

    Every (circuit, strategy) cell draws from its own seed derived from
    ``seed`` and the cell's position, so results do not depend on ``jobs``.
    """
    table = table or build_swap_table(device)
    tasks = [(ci, si, c, device, table, s, shots, seed)
             for ci, c in enumerate(circuits) for si, s in enumerate(strategies)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_task, tasks))
    else:
        reports = [_task(t) for t in tasks]
    return {(circuits[t[0]].source_name, strategies[t[1]].name): r for t, r in zip(tasks, reports)}


def benchmark_csv(results: dict[tuple[str, str], ErrorReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for (circ, alloc), rep in results.items():
        for q in rep.per_qubit:
            w.writerow([circ, alloc, q, rep.shots_per_qubit, rep.errors[q],
                        f"{rep.per_qubit[q]:.6f}"])
        total = sum(rep.errors.values())
        w.writerow([circ, alloc, "all", rep.shots_per_qubit * len(rep.per_qubit), total,
                    f"{rep.percent_error:.6f}"])
    return buf.getvalue()


def median_error(results: dict[tuple[str, str], ErrorReport], strategy: str) -> float:
    return statistics.median(r.percent_error for (_, s), r in results.items() if s == strategy)
