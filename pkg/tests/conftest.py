import itertools
import random
from importlib import resources

import pytest

from qalloc.circuit import Circuit, TwoQubit, generate_random_cnot_circuit
from qalloc.device import (CouplingEdge, DeviceModel, PhysicalQubit, build_swap_table,
                           load_calibration, synthetic_device)


def make_device(n, edges, f1=1.0, name="test"):
    qubits = tuple(PhysicalQubit(i, f1) for i in range(n))
    return DeviceModel(qubits, tuple(CouplingEdge(a, b, f) for a, b, f in edges), name)


@pytest.fixture
def line3():
    """3-qubit line 0-1-2 with f01 = 0.99, f12 = 0.90."""
    return make_device(3, [(0, 1, 0.99), (1, 2, 0.90)], name="line3")


@pytest.fixture
def cx01():
    return Circuit(2, (TwoQubit("cx", 0, 1),), "cx01")


@pytest.fixture(scope="session")
def fixture_device():
    text = (resources.files("qalloc") / "data" / "rueschlikon16.json").read_text()
    return load_calibration(text)


@pytest.fixture(scope="session")
def fixture_table(fixture_device):
    return build_swap_table(fixture_device)


def small_instances(count, seed=0, max_logical=4, max_cnots=8, single_qubit=False):
    """Random (circuit, device, table) triples on line/ring/ladder devices with 3..6 qubits."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        topo = rng.choice(["line", "ring", "ladder"])
        n = rng.choice([4, 6]) if topo == "ladder" else rng.randint(3, 6)
        dev = synthetic_device(topo, n, rng.randrange(2**31), f1_range=(0.99, 1.0))
        n_l = rng.randint(2, min(max_logical, n))
        circ = generate_random_cnot_circuit(n_l, rng.randint(1, max_cnots), rng.randrange(2**31))
        if single_qubit:
            from qalloc.circuit import OneQubit
            gates = list(circ.gates)
            for _ in range(rng.randint(1, 3)):
                gates.insert(rng.randrange(len(gates) + 1), OneQubit("h", rng.randrange(n_l)))
            circ = Circuit(n_l, tuple(gates), circ.source_name)
        out.append((circ, dev, build_swap_table(dev)))
    return out


def all_simple_paths(device, u, v):
    """Every simple path u -> v over couplings with positive fidelity (DFS)."""
    paths = []

    def walk(path):
        x = path[-1]
        if x == v:
            paths.append(list(path))
            return
        for y in range(device.num_qubits):
            if y not in path and device.fidelity2(x, y) > 0:
                path.append(y)
                walk(path)
                path.pop()

    walk([u])
    return paths


def brute_swap_product(device, u, v):
    if u == v:
        return 1.0
    best = 0.0
    for path in all_simple_paths(device, u, v):
        f = 1.0
        for a, b in zip(path, path[1:]):
            f *= device.fidelity2(a, b) ** 3
        best = max(best, f)
    return best


def injective_maps(n_l, n_p):
    return itertools.permutations(range(n_p), n_l)
