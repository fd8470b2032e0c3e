"""Dijkstra search over the tree of partial allocations.

Vertices are partial allocations that assign logical qubits in a fixed
(most-constrained-first) order; the edge from ``A`` to its extension ``A'``
weighs ``F_A - F_A'``, so the cost of reaching ``A`` from the root telescopes
to ``F_root - F_A``.  The frontier is keyed by ``-ln F_A``, which orders nodes
identically and stays well conditioned for tiny fidelities.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .allocation import Allocation, BoundEvaluator, CompiledCircuit, insert_swaps
from .circuit import Circuit, qubit_order
from .device import DeviceModel, SwapPathTable
from .errors import InfeasibleAllocation, SearchResourceError

DEFAULT_MAX_FRONTIER = 2**20


@dataclass(frozen=True)
class SearchNode:
    allocation: Allocation
    bound: float
    depth: int


class SearchState:
    """Mutable state of one search; owned by a single caller."""

    def __init__(self, evaluator: BoundEvaluator, root: Allocation, order: list[int],
                 max_frontier: int = DEFAULT_MAX_FRONTIER):
        self.evaluator = evaluator
        self.root = root
        self.order = tuple(order)
        self.max_frontier = max_frontier
        self._base = root.to_list(evaluator.num_logical)
        self.root_log_bound = evaluator.log_bound(self._base)
        # heap entries: (-log bound, physical assignment along ``order``)
        self.frontier: list[tuple[float, tuple[int, ...]]] = []
        if self.root_log_bound > -math.inf:
            self.frontier.append((-self.root_log_bound, ()))
        self.best_full: tuple[Allocation, float] | None = None
        self.steps_taken = 0
        self.children_generated = 0
        self.complete = False
        self.last_popped_key = -math.inf

    @property
    def root_bound(self) -> float:
        return math.exp(self.root_log_bound)

    def allocation_of(self, assign: tuple[int, ...]) -> Allocation:
        items = dict(self.root)
        items.update(zip(self.order, assign))
        return Allocation(items)

    def node(self, entry) -> SearchNode:
        key, assign = entry
        return SearchNode(self.allocation_of(assign), math.exp(-key), len(self.root) + len(assign))

    def frontier_nodes(self) -> list[SearchNode]:
        return [self.node(e) for e in sorted(self.frontier)]

    def cost(self, bound: float) -> float:
        """Path cost from the root to a node with the given bound."""
        return self.root_bound - bound

    def best_open_bound(self) -> float:
        """Highest bound among unexpanded nodes (0 if the frontier is empty)."""
        return math.exp(-self.frontier[0][0]) if self.frontier else 0.0

    def refined_bound(self) -> float:
        """Upper bound on any full completion of the root, given the work done so far."""
        best = self.best_full[1] if self.best_full else 0.0
        if self.complete:
            return best
        return max(best, self.best_open_bound())


def search_init(circuit: Circuit, device: DeviceModel, table: SwapPathTable,
                root: Allocation | None = None, *, evaluator: BoundEvaluator | None = None,
                max_frontier: int = DEFAULT_MAX_FRONTIER) -> SearchState:
    root = root if root is not None else Allocation.empty()
    evaluator = evaluator or BoundEvaluator(circuit, device, table)
    order = [q for q in qubit_order(circuit) if q not in root]
    return SearchState(evaluator, root, order, max_frontier)


def search_step(state: SearchState, budget: int, *, exhaust: bool = False) -> SearchState:
    """Pop up to ``budget`` frontier nodes in ascending cost order.

    The first leaf popped is optimal and marks the search complete; popping
    then stops unless ``exhaust`` is set, in which case expansion continues
    until the frontier is empty (used to audit worst-case behaviour).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    ev = state.evaluator
    order, depth_full = state.order, len(state.order)
    frontier = state.frontier
    n = ev.n
    for _ in range(budget):
        if not frontier or (state.complete and not exhaust):
            break
        entry = heapq.heappop(frontier)
        key, assign = entry
        state.steps_taken += 1
        if key < state.last_popped_key - 1e-12:
            raise AssertionError("frontier popped out of order")
        state.last_popped_key = key
        if len(assign) == depth_full:
            if state.best_full is None:
                state.best_full = (state.allocation_of(assign), math.exp(-key))
                state.complete = True
            continue
        l2p = list(state._base)
        for l, p in zip(order, assign):
            l2p[l] = p
        used = {p for p in l2p if p >= 0}
        nxt = order[len(assign)]
        for p in range(n):
            if p in used:
                continue
            state.children_generated += 1
            l2p[nxt] = p
            lb = ev.log_bound(l2p)
            if lb == -math.inf:
                continue
            heapq.heappush(frontier, (-lb, assign + (p,)))
        if len(frontier) > state.max_frontier:
            raise SearchResourceError(
                f"search frontier exceeded {state.max_frontier} nodes")
    return state


def local_allocate(circuit: Circuit, device: DeviceModel, table: SwapPathTable, *,
                   max_frontier: int = DEFAULT_MAX_FRONTIER,
                   evaluator: BoundEvaluator | None = None) -> tuple[CompiledCircuit, float]:
    """Optimal allocation under connectivity-only SWAP insertion and the fixed order."""
    if circuit.num_qubits > device.num_qubits:
        raise InfeasibleAllocation(
            f"{circuit.num_qubits} logical qubits do not fit on {device.num_qubits} physical qubits")
    state = search_init(circuit, device, table, evaluator=evaluator, max_frontier=max_frontier)
    while state.frontier and not state.complete:
        search_step(state, 4096)
    if state.best_full is None:
        raise InfeasibleAllocation(f"no feasible allocation of {circuit.source_name} on {device.name}")
    alloc, fid = state.best_full
    return insert_swaps(circuit, device, alloc, table), fid
