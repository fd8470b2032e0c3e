"""Device coupling graph with calibrated fidelities, and all-pairs SWAP routes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any

import numpy as np

from .errors import CalibrationError


@dataclass(frozen=True)
class PhysicalQubit:
    index: int
    fidelity1: float
    readout_fidelity: float | None = None


@dataclass(frozen=True)
class CouplingEdge:
    a: int
    b: int
    fidelity2: float

    def __post_init__(self):
        if self.a == self.b:
            raise CalibrationError(f"self-loop edge on qubit {self.a}")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class DeviceModel:
    qubits: tuple[PhysicalQubit, ...]
    edges: tuple[CouplingEdge, ...]
    name: str = "device"
    _fid2: dict = field(init=False, repr=False, compare=False)
    _neighbors: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "edges", tuple(self.edges))
        n = len(self.qubits)
        for i, q in enumerate(self.qubits):
            if q.index != i:
                raise CalibrationError(f"qubit ids must be 0..{n - 1} in order (got {q.index} at {i})")
            _check_unit("fidelity1", q.fidelity1, f"qubit {i}")
            if q.readout_fidelity is not None:
                _check_unit("readout", q.readout_fidelity, f"qubit {i}")
        fid2: dict[tuple[int, int], float] = {}
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for e in self.edges:
            if not (0 <= e.a < n and 0 <= e.b < n):
                raise CalibrationError(f"edge ({e.a}, {e.b}) references a missing qubit")
            _check_unit("fidelity2", e.fidelity2, f"edge ({e.a}, {e.b})")
            if (e.a, e.b) in fid2:
                raise CalibrationError(f"duplicate edge ({e.a}, {e.b})")
            fid2[e.a, e.b] = fid2[e.b, e.a] = float(e.fidelity2)
            # zero-fidelity couplings never carry gates
            if e.fidelity2 > 0:
                nbrs[e.a].append(e.b)
                nbrs[e.b].append(e.a)
        object.__setattr__(self, "_fid2", fid2)
        object.__setattr__(self, "_neighbors", tuple(tuple(sorted(x)) for x in nbrs))

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    def fidelity1(self, p: int) -> float:
        return self.qubits[p].fidelity1

    def fidelity2(self, a: int, b: int) -> float:
        """Fidelity of the coupling (a, b); 0 when the qubits are not coupled."""
        return self._fid2.get((a, b), 0.0)

    def adjacent(self, a: int, b: int) -> bool:
        return self._fid2.get((a, b), 0.0) > 0

    def neighbors(self, p: int) -> tuple[int, ...]:
        return self._neighbors[p]

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "qubits": [_qubit_doc(q) for q in self.qubits],
            "edges": [{"a": e.a, "b": e.b, "fidelity2": e.fidelity2} for e in self.edges],
        }
        return json.dumps(doc, indent=2) + "\n"


def _qubit_doc(q: PhysicalQubit) -> dict:
    d: dict[str, Any] = {"id": q.index, "fidelity1": q.fidelity1}
    if q.readout_fidelity is not None:
        d["readout"] = q.readout_fidelity
    return d


def _check_unit(label, value, where):
    if isinstance(value, bool) or not isinstance(value, Real) or not 0.0 <= value <= 1.0:
        raise CalibrationError(f"{label} of {where} must be a number in [0, 1], got {value!r}")


def _field(obj: dict, key: str, where: str, kinds=(Real,), optional=False):
    if key not in obj:
        if optional:
            return None
        raise CalibrationError(f"{where}: missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise CalibrationError(f"{where}: field {key!r} has wrong type ({type(value).__name__})")
    return value


def load_calibration(text: str) -> DeviceModel:
    """Build a :class:`DeviceModel` from a calibration JSON document.

    Fidelities outside [0, 1] are rejected, never clamped.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"malformed calibration JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CalibrationError("calibration document must be a JSON object")
    name = _field(doc, "name", "calibration", (str,))
    raw_qubits = _field(doc, "qubits", "calibration", (list,))
    raw_edges = _field(doc, "edges", "calibration", (list,))

    by_id: dict[int, PhysicalQubit] = {}
    for i, q in enumerate(raw_qubits):
        where = f"qubits[{i}]"
        if not isinstance(q, dict):
            raise CalibrationError(f"{where} must be an object")
        qid = _field(q, "id", where, (int,))
        if qid in by_id:
            raise CalibrationError(f"{where}: duplicate qubit id {qid}")
        f1 = _field(q, "fidelity1", where)
        ro = _field(q, "readout", where, optional=True)
        _check_unit("fidelity1", f1, where)
        if ro is not None:
            _check_unit("readout", ro, where)
            ro = float(ro)
        by_id[qid] = PhysicalQubit(qid, float(f1), ro)
    if sorted(by_id) != list(range(len(by_id))):
        raise CalibrationError("qubit ids must be exactly 0..n-1")

    edges = []
    for i, e in enumerate(raw_edges):
        where = f"edges[{i}]"
        if not isinstance(e, dict):
            raise CalibrationError(f"{where} must be an object")
        a = _field(e, "a", where, (int,))
        b = _field(e, "b", where, (int,))
        f2 = _field(e, "fidelity2", where)
        _check_unit("fidelity2", f2, where)
        edges.append(CouplingEdge(a, b, float(f2)))
    return DeviceModel(tuple(by_id[i] for i in range(len(by_id))), tuple(edges), name)


def swap_fidelity(edge: CouplingEdge) -> float:
    """A SWAP is three cx on the same coupling."""
    return edge.fidelity2 ** 3


def best_gate_fidelities(device: DeviceModel) -> tuple[float, float]:
    """Best single-qubit and best two-qubit fidelity anywhere on the device."""
    if not device.qubits:
        raise ValueError("device has no qubits")
    if not device.edges:
        raise ValueError("best two-qubit fidelity is undefined on a device without edges")
    return (max(q.fidelity1 for q in device.qubits),
            max(e.fidelity2 for e in device.edges))


class SwapPathTable:
    """All-pairs most-reliable SWAP routes, computed by Floyd-Warshall.

    Weights are additive log-costs ``-ln(F_e**3)``; zero-fidelity couplings are
    left out of the graph.  ``path(u, v)`` lists the vertices from ``u`` to
    ``v`` inclusive.
    """

    def __init__(self, n: int, logcost: list[list[float]], nxt: list[list[int]]):
        self.n = n
        self.logcost = logcost
        self._next = nxt

    def reachable(self, u: int, v: int) -> bool:
        return self.logcost[u][v] < math.inf

    def product(self, u: int, v: int) -> float:
        """Product of SWAP fidelities along the best u -> v route (0 if unreachable)."""
        c = self.logcost[u][v]
        return 0.0 if c == math.inf else math.exp(-c)

    def path(self, u: int, v: int) -> list[int]:
        if not self.reachable(u, v):
            return []
        out = [u]
        while u != v:
            u = self._next[u][v]
            out.append(u)
        return out

    def path_edges(self, u: int, v: int) -> list[tuple[int, int]]:
        p = self.path(u, v)
        return list(zip(p, p[1:]))


def build_swap_table(device: DeviceModel) -> SwapPathTable:
    n = device.num_qubits
    inf = math.inf
    dist = [[inf] * n for _ in range(n)]
    nxt = [[-1] * n for _ in range(n)]
    for u in range(n):
        dist[u][u] = 0.0
        nxt[u][u] = u
    for e in device.edges:
        if e.fidelity2 <= 0:
            continue
        w = -3.0 * math.log(e.fidelity2)
        for u, v in ((e.a, e.b), (e.b, e.a)):
            dist[u][v] = w
            nxt[u][v] = v
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == inf:
                continue
            di, ni = dist[i], nxt[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
                    ni[j] = ni[k]
    return SwapPathTable(n, dist, nxt)


# ---------------------------------------------------------------------------
# Synthetic calibrations

TOPOLOGIES = ("line", "ring", "ladder", "grid", "complete")


def topology_edges(topology: str, n: int, rows: int | None = None) -> list[tuple[int, int]]:
    """Coupling pairs for a named topology.

    ``ladder`` uses the 16-qubit Rueschlikon numbering generalised to any even
    ``n``: a ring 0-1-...-(n-1)-0 plus rungs ``i <-> n+1-i`` for
    ``2 <= i < n/2``.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    if topology == "line":
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif topology == "ring":
        if n < 3:
            raise ValueError("ring needs at least 3 qubits")
        pairs = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    elif topology == "ladder":
        if n < 4 or n % 2:
            raise ValueError("ladder needs an even number of qubits >= 4")
        pairs = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
        pairs += [(i, n + 1 - i) for i in range(2, n // 2)]
    elif topology == "grid":
        if rows is None:
            rows = max(r for r in range(1, math.isqrt(n) + 1) if n % r == 0)
        if n % rows:
            raise ValueError(f"{n} qubits do not fill a grid with {rows} rows")
        cols = n // rows
        pairs = []
        for r in range(rows):
            for c in range(cols):
                q = r * cols + c
                if c + 1 < cols:
                    pairs.append((q, q + 1))
                if r + 1 < rows:
                    pairs.append((q, q + cols))
    elif topology == "complete":
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        raise ValueError(f"unknown topology {topology!r}")
    return sorted((min(a, b), max(a, b)) for a, b in pairs)


def synthetic_device(topology: str, n: int, seed: int, f2_range=(0.85, 0.99),
                     f1_range=(0.999, 0.999), readout_range=None, rows=None,
                     name: str | None = None) -> DeviceModel:
    """Random calibration with fidelities drawn uniformly from the given ranges."""
    for lo, hi in filter(None, (f2_range, f1_range, readout_range)):
        if not 0 <= lo <= hi <= 1:
            raise ValueError(f"bad fidelity range {lo}:{hi}")
    rng = np.random.default_rng(seed)
    pairs = topology_edges(topology, n, rows)
    f1 = rng.uniform(*f1_range, size=n)
    ro = rng.uniform(*readout_range, size=n) if readout_range else [None] * n
    f2 = rng.uniform(*f2_range, size=len(pairs))
    qubits = tuple(PhysicalQubit(i, round(float(f1[i]), 6),
                                 None if ro[i] is None else round(float(ro[i]), 6))
                   for i in range(n))
    edges = tuple(CouplingEdge(a, b, round(float(f), 6)) for (a, b), f in zip(pairs, f2))
    return DeviceModel(qubits, edges, name or f"{topology}{n}-synthetic-s{seed}")
