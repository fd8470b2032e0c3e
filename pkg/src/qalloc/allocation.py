"""Allocations, connectivity-only SWAP insertion and fidelity bookkeeping."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .circuit import Circuit, Measure, OneQubit, Swap, TwoQubit
from .device import DeviceModel, SwapPathTable
from .errors import AllocationError, InfeasibleAllocation

TOL = 1e-12


class Allocation(Mapping):
    """Partial injective map from logical to physical qubits (immutable)."""

    __slots__ = ("_map", "_used")

    def __init__(self, mapping: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = dict(mapping)
        used = set(items.values())
        if len(used) != len(items):
            raise AllocationError(f"allocation is not injective: {items}")
        self._map = dict(sorted(items.items()))
        self._used = frozenset(used)

    @classmethod
    def empty(cls) -> Allocation:
        return cls()

    @classmethod
    def from_order(cls, order, physical) -> Allocation:
        """Map ``order[i] -> physical[i]`` for each assigned position."""
        return cls(zip(order, physical))

    def __getitem__(self, logical: int) -> int:
        return self._map[logical]

    def __iter__(self):
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __hash__(self):
        return hash(tuple(self._map.items()))

    def __eq__(self, other):
        if isinstance(other, Allocation):
            return self._map == other._map
        return NotImplemented

    def __repr__(self):
        body = ", ".join(f"{l}->{p}" for l, p in self._map.items())
        return f"Allocation({{{body}}})"

    @property
    def used(self) -> frozenset[int]:
        return self._used

    def is_full(self, num_logical: int) -> bool:
        return len(self._map) == num_logical and all(l in self._map for l in range(num_logical))

    def is_sub_allocation_of(self, other: Allocation) -> bool:
        return all(other.get(l) == p for l, p in self._map.items())

    def to_list(self, num_logical: int) -> list[int]:
        """Dense logical -> physical list with -1 for unmapped qubits."""
        out = [-1] * num_logical
        for l, p in self._map.items():
            out[l] = p
        return out


def extend(a: Allocation, logical: int, physical: int) -> Allocation:
    if logical in a:
        raise AllocationError(f"logical qubit {logical} is already mapped to {a[logical]}")
    if physical in a.used:
        raise AllocationError(f"physical qubit {physical} is already in use")
    items = dict(a)
    items[logical] = physical
    return Allocation(items)


@dataclass(frozen=True)
class CompiledCircuit:
    physical_gates: tuple  # OneQubit | TwoQubit | Swap over physical indices
    initial_map: Allocation
    final_map: Allocation
    measures: tuple[tuple[int, int], ...] = ()
    num_clbits: int = 0

    @property
    def swap_count(self) -> int:
        return sum(isinstance(g, Swap) for g in self.physical_gates)

    def expanded_gates(self) -> list:
        """Physical gate list with every SWAP replaced by its three cx."""
        out = []
        for g in self.physical_gates:
            if isinstance(g, Swap):
                out.extend(g.as_cx())
            else:
                out.append(g)
        return out

    def gate_counts(self) -> tuple[int, int]:
        """(N_1, N_2): executed single- and two-qubit gates, SWAPs counted as 3 cx."""
        n1 = sum(isinstance(g, OneQubit) for g in self.physical_gates)
        n2 = sum(3 if isinstance(g, Swap) else 1
                 for g in self.physical_gates if not isinstance(g, OneQubit))
        return n1, n2


def insert_swaps(circuit: Circuit, device: DeviceModel, full: Allocation,
                 table: SwapPathTable) -> CompiledCircuit:
    """Route ``circuit`` under ``full`` inserting SWAPs only where adjacency demands.

    One forward pass: before a cx on non-adjacent qubits, the control is
    swapped along the table's best route until it neighbours the target.  The
    running map is updated permanently; nothing is swapped back.
    """
    if not full.is_full(circuit.num_qubits):
        raise AllocationError("insert_swaps needs a full allocation")
    if any(p >= device.num_qubits for p in full.values()):
        raise AllocationError("allocation references a qubit missing from the device")
    l2p = dict(full)
    p2l = {p: l for l, p in l2p.items()}
    out: list = []
    measures: list[tuple[int, int]] = []
    for g in circuit.gates:
        if isinstance(g, OneQubit):
            out.append(OneQubit(g.name, l2p[g.target], g.params))
        elif isinstance(g, Measure):
            measures.append((l2p[g.target], g.clbit))
        else:
            p, q = l2p[g.control], l2p[g.target]
            if not device.adjacent(p, q):
                path = table.path(p, q)
                if not path:
                    raise InfeasibleAllocation(
                        f"physical qubits {p} and {q} are not connected on {device.name}")
                for u, v in zip(path[:-2], path[1:-1]):
                    out.append(Swap(u, v))
                    lu, lv = p2l.pop(u, None), p2l.pop(v, None)
                    if lu is not None:
                        l2p[lu] = v
                        p2l[v] = lu
                    if lv is not None:
                        l2p[lv] = u
                        p2l[u] = lv
                p = path[-2]
            out.append(TwoQubit(g.name, p, q))
    return CompiledCircuit(tuple(out), full, Allocation(l2p), tuple(measures), circuit.num_clbits)


def total_fidelity(compiled: CompiledCircuit, device: DeviceModel) -> float:
    """Product of every executed gate's fidelity; measurements are excluded."""
    f = 1.0
    for g in compiled.physical_gates:
        if isinstance(g, Swap):
            e = device.fidelity2(g.a, g.b)
            f *= e * e * e
        elif isinstance(g, TwoQubit):
            f *= device.fidelity2(g.control, g.target)
        else:
            f *= device.fidelity1(g.target)
    return f


def edge_weight(parent: float, child: float) -> float:
    """Weight of the DAG edge extending an allocation with bound ``parent`` to ``child``."""
    w = parent - child
    if w < -TOL:
        raise AssertionError(f"fidelity bound increased under extension ({parent} -> {child})")
    return max(w, 0.0)


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


class BoundEvaluator:
    """Fast log-domain fidelity upper bound for partial allocations.

    Qubits whose physical location is known in every completion of the
    allocation are *certain*; everything else (unmapped qubits, and mapped
    qubits that a SWAP chain triggered by an uncertain gate may have
    displaced) is *uncertain* and lives somewhere in the set of positions not
    held by a certain qubit.  Gates on certain qubits are charged exactly as
    :func:`insert_swaps` would; any other gate is charged the best route cost
    over the positions it could occupy.  The bound is exact for full
    allocations and never increases when a mapping is added.
    """

    def __init__(self, circuit: Circuit, device: DeviceModel, table: SwapPathTable):
        self.circuit = circuit
        self.device = device
        self.table = table
        n = self.n = device.num_qubits
        self.num_logical = circuit.num_qubits
        self.ops: list[tuple[bool, int, int]] = []
        for g in circuit.gates:
            if isinstance(g, TwoQubit):
                self.ops.append((True, g.control, g.target))
            elif isinstance(g, OneQubit):
                self.ops.append((False, g.target, -1))
        self.logf1 = [_log(q.fidelity1) for q in device.qubits]
        self.logf1_sorted = sorted(range(n), key=lambda p: (-self.logf1[p], p))
        # route[p][q]: exact log-fidelity of a cx with control at p, target at q,
        # including its SWAP chain; None when q is unreachable from p.
        self.route: list[list[float | None]] = [[None] * n for _ in range(n)]
        self.swaps: list[list[tuple]] = [[()] * n for _ in range(n)]
        self.interior: list[list[int]] = [[0] * n for _ in range(n)]
        for p in range(n):
            for q in range(n):
                if p == q:
                    continue
                if device.adjacent(p, q):
                    self.route[p][q] = _log(device.fidelity2(p, q))
                    continue
                path = table.path(p, q)
                if not path:
                    continue
                cost = 0.0
                for u, v in zip(path[:-2], path[1:-1]):
                    cost += 3.0 * _log(device.fidelity2(u, v))
                cost += _log(device.fidelity2(path[-2], q))
                self.route[p][q] = cost
                self.swaps[p][q] = tuple(zip(path[:-2], path[1:-1]))
                mask = 0
                for v in path[1:-1]:
                    mask |= 1 << v
                self.interior[p][q] = mask
        # candidate targets for each control position, best route first
        self.by_control = [sorted((q for q in range(n) if self.route[p][q] is not None),
                                  key=lambda q, p=p: (-self.route[p][q], q)) for p in range(n)]
        self.by_target = [sorted((p for p in range(n) if self.route[p][q] is not None),
                                 key=lambda p, q=q: (-self.route[p][q], p)) for q in range(n)]
        pairs = [(p, q) for p in range(n) for q in range(n) if self.route[p][q] is not None]
        self.pairs_sorted = sorted(pairs, key=lambda pq: (-self.route[pq[0]][pq[1]], pq))

    def log_bound(self, l2p: list[int]) -> float:
        """Log of the fidelity upper bound; ``-inf`` when no completion is feasible.

        ``l2p`` is a dense logical -> physical list with -1 for unmapped qubits.
        """
        pos = list(l2p)
        occ = [-1] * self.n
        for l, p in enumerate(pos):
            if p >= 0:
                occ[p] = l
        route, logf1 = self.route, self.logf1
        total = 0.0
        for two, a, b in self.ops:
            if not two:
                p = pos[a]
                if p >= 0:
                    total += logf1[p]
                else:
                    for p in self.logf1_sorted:
                        if occ[p] < 0:
                            total += logf1[p]
                            break
                    else:
                        return -math.inf
                continue
            p, q = pos[a], pos[b]
            if p >= 0 and q >= 0:
                r = route[p][q]
                if r is None:
                    return -math.inf
                total += r
                for u, v in self.swaps[p][q]:
                    lu, lv = occ[u], occ[v]
                    occ[u], occ[v] = lv, lu
                    if lv >= 0:
                        pos[lv] = u
                    if lu >= 0:
                        pos[lu] = v
                continue
            # at least one endpoint uncertain
            taint = 0
            if p >= 0:
                best = None
                for t in self.by_control[p]:
                    if occ[t] < 0:
                        if best is None:
                            best = route[p][t]
                        taint |= self.interior[p][t]
                if best is None:
                    return -math.inf
                if taint:
                    occ[p] = -1
                    pos[a] = -1
            elif q >= 0:
                best = None
                for s in self.by_target[q]:
                    if occ[s] < 0:
                        if best is None:
                            best = route[s][q]
                        taint |= self.interior[s][q]
                if best is None:
                    return -math.inf
            else:
                best = None
                for s, t in self.pairs_sorted:
                    if occ[s] < 0 and occ[t] < 0:
                        best = route[s][t]
                        break
                if best is None:
                    return -math.inf
                taint = -1
            total += best
            if taint:
                for v in range(self.n):
                    l = occ[v]
                    if l >= 0 and (taint >> v) & 1:
                        occ[v] = -1
                        pos[l] = -1
        return total

    def bound(self, a: Allocation) -> float:
        return math.exp(self.log_bound(a.to_list(self.num_logical)))


def fidelity_bound(circuit: Circuit, device: DeviceModel, a: Allocation,
                   table: SwapPathTable) -> float:
    """Upper bound on the total fidelity of any full allocation extending ``a``."""
    return BoundEvaluator(circuit, device, table).bound(a)
