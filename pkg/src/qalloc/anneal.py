"""Hybrid allocator: simulated annealing over growing sub-allocations.

Each round anneals the placement of the first ``r`` qubits of the
most-constrained-first order.  A proposal is scored by running the Dijkstra
local search from it for ``n`` pops; the score is the refined upper bound on
any full allocation containing the proposal, and every full allocation the
search reaches is kept.  The run ends after the first round in which a full
allocation was seen.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence(seed)``;
restart ``k`` uses child ``k`` of ``SeedSequence(seed).spawn(restarts)``, so
adding restarts never changes the earlier ones.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .allocation import Allocation, BoundEvaluator, CompiledCircuit, extend, insert_swaps
from .circuit import Circuit, qubit_order
from .device import DeviceModel, SwapPathTable
from .errors import AllocationError, InfeasibleAllocation
from .search import DEFAULT_MAX_FRONTIER, SearchState, search_step


@dataclass(frozen=True)
class AnnealConfig:
    n: int = 10
    T0: float = 10.0
    tau: float = 25.0
    iters_per_round: int = 50
    seed: int = 0
    restarts: int = 1
    max_frontier: int = DEFAULT_MAX_FRONTIER

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not self.T0 > 0 or not self.tau > 0:
            raise ValueError("T0 and tau must be positive")
        if self.iters_per_round < 1 or self.restarts < 1:
            raise ValueError("iters_per_round and restarts must be positive")


@dataclass(frozen=True)
class TraceRecord:
    round: int
    s: int
    temperature: float
    bound: float
    accepted: bool
    full_found: bool


@dataclass
class AnnealTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "s", "temperature", "bound", "accepted", "full_found"])
        for r in self.records:
            w.writerow([r.round, r.s, repr(r.temperature), repr(r.bound),
                        int(r.accepted), int(r.full_found)])
        return buf.getvalue()


def temperature(s: int, T0: float, tau: float) -> float:
    return T0 * math.exp(-s / tau)


def metropolis_accept(f_current: float, f_proposed: float, T: float, u: float) -> bool:
    """Always take a better-or-equal bound; take a worse one with probability exp(-delta/T)."""
    if f_proposed >= f_current:
        return True
    return u < math.exp(-(f_current - f_proposed) / T)


def propose(current: Allocation, device: DeviceModel, round_qubits, rng) -> Allocation:
    """Move one uniformly chosen round qubit to a uniformly chosen slot free of the others."""
    l = round_qubits[int(rng.integers(len(round_qubits)))]
    others = {p for q, p in current.items() if q != l}
    free = [p for p in range(device.num_qubits) if p not in others]
    if not free:
        raise AllocationError("no free physical qubit to propose")
    items = dict(current)
    items[l] = free[int(rng.integers(len(free)))]
    return Allocation(items)


class _Run:
    """One annealing run; keeps the best full allocation seen."""

    def __init__(self, circuit, device, table, config, evaluator):
        self.circuit, self.device, self.table = circuit, device, table
        self.config = config
        self.ev = evaluator
        self.best_full: tuple[Allocation, float] | None = None

    def note_full(self, alloc: Allocation, fid: float) -> None:
        if fid <= 0:
            return
        if self.best_full is None or fid > self.best_full[1] or (
                fid == self.best_full[1] and _key(alloc) < _key(self.best_full[0])):
            self.best_full = (alloc, fid)

    def score(self, alloc: Allocation) -> tuple[float, bool]:
        """Refined bound for ``alloc`` and whether a full allocation turned up."""
        order = [q for q in qubit_order(self.circuit) if q not in alloc]
        state = SearchState(self.ev, alloc, order, self.config.max_frontier)
        if not order:
            fid = state.root_bound
            self.note_full(alloc, fid)
            return fid, fid > 0
        if self.config.n > 0 and state.frontier:
            search_step(state, self.config.n)
        found = state.best_full is not None
        if found:
            self.note_full(*state.best_full)
        return state.refined_bound(), found


def _key(a: Allocation) -> tuple:
    return tuple(sorted(a.items()))


def _anneal_once(circuit, device, table, config, seed_seq, evaluator=None):
    ev = evaluator or BoundEvaluator(circuit, device, table)
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    run = _Run(circuit, device, table, config, ev)
    trace = AnnealTrace()
    order = qubit_order(circuit)

    if config.n > 0:
        state = SearchState(ev, Allocation.empty(), order, config.max_frontier)
        if state.frontier:
            search_step(state, config.n)
        if state.complete:
            return state.best_full, trace
        if state.best_full:
            run.note_full(*state.best_full)

    prev_best = Allocation.empty()
    for r in range(1, len(order) + 1):
        round_qubits = order[:r]
        free = [p for p in range(device.num_qubits) if p not in prev_best.used]
        current = extend(prev_best, order[r - 1], free[int(rng.integers(len(free)))])
        f_cur, _ = run.score(current)
        best_round = (current, f_cur)
        for s in range(config.iters_per_round):
            T = temperature(s, config.T0, config.tau)
            proposal = propose(current, device, round_qubits, rng)
            f_prop, found = run.score(proposal)
            accepted = metropolis_accept(f_cur, f_prop, T, float(rng.random()))
            trace.records.append(TraceRecord(r, s, T, f_prop, accepted, found))
            if accepted:
                current, f_cur = proposal, f_prop
            if f_prop > best_round[1]:
                best_round = (proposal, f_prop)
        if run.best_full is not None:
            return run.best_full, trace
        prev_best = best_round[0]
    return run.best_full, trace


def _restart_job(args):
    circuit, device, table, config, seed_seq = args
    return _anneal_once(circuit, device, table, config, seed_seq)


def hybrid_allocate(circuit: Circuit, device: DeviceModel, table: SwapPathTable,
                    config: AnnealConfig = AnnealConfig(), *, jobs: int = 1,
                    evaluator: BoundEvaluator | None = None,
                    ) -> tuple[CompiledCircuit, float, AnnealTrace]:
    """Run ``config.restarts`` independent annealing runs and keep the best.

    Returns the compiled circuit, its total fidelity and the trace of the
    winning restart.  Ties between restarts go to the lower restart index.
    """
    if circuit.num_qubits > device.num_qubits:
        raise InfeasibleAllocation(
            f"{circuit.num_qubits} logical qubits do not fit on {device.num_qubits} physical qubits")
    if circuit.num_qubits == 0:
        empty = Allocation.empty()
        return insert_swaps(circuit, device, empty, table), 1.0, AnnealTrace()
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    if jobs > 1 and config.restarts > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_restart_job,
                                    [(circuit, device, table, config, s) for s in seeds]))
    else:
        ev = evaluator or BoundEvaluator(circuit, device, table)
        results = [_anneal_once(circuit, device, table, config, s, ev) for s in seeds]
    best = None
    for found, trace in results:
        if found is not None and (best is None or found[1] > best[0][1]):
            best = (found, trace)
    if best is None:
        raise InfeasibleAllocation(f"no feasible allocation of {circuit.source_name} on {device.name}")
    (alloc, fid), trace = best
    return insert_swaps(circuit, device, alloc, table), fid, trace
