import math
import random
from fractions import Fraction

import pytest

from qalloc.allocation import Allocation, CompiledCircuit, insert_swaps
from qalloc.circuit import OneQubit, Swap, TwoQubit, generate_random_cnot_circuit
from qalloc.device import CouplingEdge, build_swap_table, synthetic_device
from qalloc.errors import SimulationError
from qalloc.noise import expected_error, measured_qubits, simulate_measured_error

from conftest import make_device


def _compiled(gates, final):
    return CompiledCircuit(tuple(gates), Allocation(final), Allocation(final), (), 0)


def enumerate_bit_states(compiled, device):
    """Exact excited probabilities by walking every reachable bit state with rational weights."""
    dist = {0: Fraction(1)}
    for g in compiled.expanded_gates():
        c, t = g.control, g.target
        eps = Fraction(1) - Fraction(device.fidelity2(c, t))
        nxt = {}
        for state, pr in dist.items():
            if state >> c & 1:
                state ^= 1 << t
            branches = [(state, 1 - eps)] + [
                (state ^ (fc << c) ^ (ft << t), eps / 4) for fc in (0, 1) for ft in (0, 1)]
            for s, w in branches:
                if w:
                    nxt[s] = nxt.get(s, 0) + pr * w
        dist = nxt
    return {m: sum((pr for s, pr in dist.items() if s >> m & 1), Fraction(0))
            for m in measured_qubits(compiled)}


def test_noiseless_zero():
    dev = make_device(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    comp = insert_swaps(generate_random_cnot_circuit(3, 12, 0), dev,
                        Allocation({0: 0, 1: 3, 2: 1}), build_swap_table(dev))
    rep = simulate_measured_error(comp, dev, 500, seed=1)
    assert rep.percent_error == 0 and all(v == 0 for v in rep.per_qubit.values())
    assert all(v == 0 for v in expected_error(comp, dev).values())


def test_single_cx_analytic():
    dev = make_device(2, [(0, 1, 0.98)])
    comp = _compiled([TwoQubit("cx", 0, 1)], {0: 0, 1: 1})
    assert expected_error(comp, dev) == pytest.approx({0: 0.01, 1: 0.01}, abs=1e-15)
    half = (1 - Fraction(0.98)) / 2
    assert enumerate_bit_states(comp, dev) == {0: half, 1: half}
    shots = 100_000
    rep = simulate_measured_error(comp, dev, shots, seed=7)
    sigma = math.sqrt(0.01 * 0.99 / shots)
    for m in (0, 1):
        assert abs(rep.per_qubit[m] - 0.01) <= 3 * sigma


def test_report_structure():
    dev = synthetic_device("line", 5, 0)
    comp = insert_swaps(generate_random_cnot_circuit(3, 8, 2), dev,
                        Allocation({0: 4, 1: 0, 2: 2}), build_swap_table(dev))
    rep = simulate_measured_error(comp, dev, 300, seed=3)
    assert list(rep.per_qubit) == measured_qubits(comp)
    assert rep.shots_per_qubit == 300
    assert all(0 <= v <= 1 for v in rep.per_qubit.values())
    pooled = sum(rep.per_qubit.values()) / len(rep.per_qubit)
    assert rep.percent_error == pytest.approx(pooled, abs=1e-15)
    assert rep == simulate_measured_error(comp, dev, 300, seed=3)


def test_measured_qubits_follow_swaps():
    comp = _compiled([Swap(0, 1)], {0: 0})
    comp = CompiledCircuit(comp.physical_gates, Allocation({0: 0}), Allocation({0: 1}), (), 0)
    assert measured_qubits(comp) == [1]


def _random_compiled(rng):
    n = rng.randint(3, 6)
    dev = synthetic_device(rng.choice(["line", "ring"]), n, rng.randrange(2**31),
                           f2_range=(0.6, 1.0))
    n_l = rng.randint(2, n)
    circ = generate_random_cnot_circuit(n_l, rng.randint(1, 6), rng.randrange(2**31))
    phys = rng.sample(range(n), n_l)
    return insert_swaps(circ, dev, Allocation(enumerate(phys)), build_swap_table(dev)), dev


def test_expected_error_matches_enumeration():
    rng = random.Random(17)
    for _ in range(60):
        comp, dev = _random_compiled(rng)
        exact = enumerate_bit_states(comp, dev)
        got = expected_error(comp, dev)
        for m, v in exact.items():
            assert got[m] == pytest.approx(float(v), abs=1e-12)


def test_monte_carlo_converges_to_expected():
    rng = random.Random(4)
    shots = 100_000
    for _ in range(4):
        comp, dev = _random_compiled(rng)
        exp = expected_error(comp, dev)
        rep = simulate_measured_error(comp, dev, shots, seed=rng.randrange(2**31))
        for m, p in exp.items():
            assert abs(rep.per_qubit[m] - p) <= 4 * math.sqrt(max(p * (1 - p), 1e-9) / shots) + 1e-9


def test_monotone_harm():
    rng = random.Random(9)
    for _ in range(40):
        comp, dev = _random_compiled(rng)
        edges = list(dev.edges)
        i = rng.randrange(len(edges))
        e = edges[i]
        edges[i] = CouplingEdge(e.a, e.b, e.fidelity2 * rng.uniform(0.5, 1.0))
        worse = make_device(dev.num_qubits, [(x.a, x.b, x.fidelity2) for x in edges])
        before, after = expected_error(comp, dev), expected_error(comp, worse)
        for m in before:
            assert after[m] >= before[m] - 1e-12
            assert after[m] <= 0.5 + 1e-12


def test_readout_term():
    from qalloc.device import DeviceModel, PhysicalQubit
    dev = DeviceModel((PhysicalQubit(0, 1.0, 0.9), PhysicalQubit(1, 1.0, 0.95)),
                      (CouplingEdge(0, 1, 1.0),), "ro")
    comp = _compiled([TwoQubit("cx", 0, 1)], {0: 0, 1: 1})
    assert expected_error(comp, dev) == {0: 0.0, 1: 0.0}
    assert expected_error(comp, dev, readout=True) == pytest.approx({0: 0.1, 1: 0.05})
    rep = simulate_measured_error(comp, dev, 100_000, seed=2, readout=True)
    assert abs(rep.per_qubit[0] - 0.1) < 3 * math.sqrt(0.09 / 100_000)


def test_rejects_non_cx():
    dev = make_device(2, [(0, 1, 0.9)])
    with pytest.raises(SimulationError):
        simulate_measured_error(_compiled([TwoQubit("cz", 0, 1)], {0: 0, 1: 1}), dev)
    with pytest.raises(SimulationError):
        expected_error(_compiled([OneQubit("h", 0)], {0: 0, 1: 1}), dev)
    with pytest.raises(ValueError):
        simulate_measured_error(_compiled([], {0: 0}), dev, 0)


def test_exact_cap():
    dev = synthetic_device("line", 22, 0)
    gates = [TwoQubit("cx", i, i + 1) for i in range(21)]
    with pytest.raises(SimulationError):
        expected_error(_compiled(gates, {0: 0}), dev)
