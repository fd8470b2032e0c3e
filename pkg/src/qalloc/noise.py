"""Monte-Carlo bit-flip simulation of CNOT-only compiled circuits.

Every input bit starts in 0, so ideally every measurement reads 0 and any
1 is noise.  After each physical cx on coupling ``e`` an error event fires
with probability ``1 - F_e``; the event flips each of the two operand bits
independently with probability 1/2.  Readout flips are optional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import CompiledCircuit
from .circuit import OneQubit, Swap, TwoQubit
from .device import DeviceModel
from .errors import SimulationError

DEFAULT_SHOTS = 1024
MAX_EXACT_BITS = 20


@dataclass(frozen=True)
class ErrorReport:
    per_qubit: dict[int, float]
    errors: dict[int, int]
    shots_per_qubit: int
    percent_error: float


def _cx_ops(compiled: CompiledCircuit, device: DeviceModel) -> list[tuple[int, int, float]]:
    """(control, target, error probability) for every executed cx, SWAPs expanded."""
    ops = []
    for g in compiled.physical_gates:
        if isinstance(g, Swap):
            eps = 1.0 - device.fidelity2(g.a, g.b)
            ops.extend((cx.control, cx.target, eps) for cx in g.as_cx())
        elif isinstance(g, TwoQubit):
            if g.name != "cx":
                raise SimulationError(f"two-qubit gate {g.name!r} is not a cx")
            ops.append((g.control, g.target, 1.0 - device.fidelity2(g.control, g.target)))
        elif isinstance(g, OneQubit):
            if g.name != "id":
                raise SimulationError(f"single-qubit gate {g.name!r} is outside the cx-only model")
    return ops


def measured_qubits(compiled: CompiledCircuit) -> list[int]:
    """Physical qubits holding the program's logical qubits at the end of the circuit."""
    return [compiled.final_map[l] for l in sorted(compiled.final_map)]


def _readout_error(device: DeviceModel, p: int, readout: bool) -> float:
    if not readout:
        return 0.0
    ro = device.qubits[p].readout_fidelity
    return 0.0 if ro is None else 1.0 - ro


def simulate_measured_error(compiled: CompiledCircuit, device: DeviceModel,
                            shots: int = DEFAULT_SHOTS, seed=0, *,
                            readout: bool = False, qubits=None) -> ErrorReport:
    """Run ``shots`` independent executions per measured qubit, one qubit per run."""
    if shots < 1:
        raise ValueError("shots must be positive")
    ops = _cx_ops(compiled, device)
    qubits = measured_qubits(compiled) if qubits is None else list(qubits)
    rng = np.random.default_rng(seed)
    n = device.num_qubits
    errors: dict[int, int] = {}
    for m in qubits:
        bits = np.zeros((n, shots), dtype=bool)
        for c, t, eps in ops:
            bits[t] ^= bits[c]
            if eps > 0:
                event = rng.random(shots) < eps
                bits[c] ^= event & (rng.random(shots) < 0.5)
                bits[t] ^= event & (rng.random(shots) < 0.5)
        out = bits[m]
        ro = _readout_error(device, m, readout)
        if ro > 0:
            out = out ^ (rng.random(shots) < ro)
        errors[m] = int(out.sum())
    per_qubit = {m: errors[m] / shots for m in qubits}
    pooled = sum(errors.values()) / (shots * len(qubits)) if qubits else 0.0
    return ErrorReport(per_qubit, errors, shots, pooled)


def expected_error(compiled: CompiledCircuit, device: DeviceModel, *,
                   readout: bool = False, qubits=None) -> dict[int, float]:
    """Exact excited-state probability of each measured qubit under the same channel.

    Propagates the joint distribution over the bits touched by some cx
    (at most ``MAX_EXACT_BITS`` of them).
    """
    ops = _cx_ops(compiled, device)
    qubits = measured_qubits(compiled) if qubits is None else list(qubits)
    touched = sorted({q for c, t, _ in ops for q in (c, t)})
    if len(touched) > MAX_EXACT_BITS:
        raise SimulationError(f"{len(touched)} touched bits exceed the exact limit {MAX_EXACT_BITS}")
    slot = {q: i for i, q in enumerate(touched)}
    idx = np.arange(1 << len(touched))
    prob = np.zeros(1 << len(touched))
    prob[0] = 1.0
    for c, t, eps in ops:
        bc, bt = 1 << slot[c], 1 << slot[t]
        moved = np.empty_like(prob)
        moved[np.where(idx & bc, idx ^ bt, idx)] = prob
        prob = moved
        if eps > 0:
            mix = (prob + prob[idx ^ bc] + prob[idx ^ bt] + prob[idx ^ bc ^ bt]) / 4.0
            prob = (1.0 - eps) * prob + eps * mix
    out = {}
    for m in qubits:
        p1 = float(prob[(idx >> slot[m]) & 1 == 1].sum()) if m in slot else 0.0
        ro = _readout_error(device, m, readout)
        out[m] = p1 * (1.0 - ro) + (1.0 - p1) * ro
    return out
