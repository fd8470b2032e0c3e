"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""

import math
import random
import time
from fractions import Fraction

import numpy as np

from qalloc.allocation import (Allocation, BoundEvaluator, CompiledCircuit, edge_weight, extend,
                               fidelity_bound, insert_swaps, total_fidelity)
from qalloc.anneal import AnnealConfig, hybrid_allocate, metropolis_accept
from qalloc.benchmark import Strategy, median_error, run_benchmark
from qalloc.circuit import TwoQubit, generate_random_cnot_circuit
from qalloc.cli import main
from qalloc.device import build_swap_table, synthetic_device
from qalloc.errors import SearchResourceError
from qalloc.noise import expected_error, simulate_measured_error
from qalloc.oracle import count_worst_case_edges, exhaustive_allocate
from qalloc.search import local_allocate, search_init, search_step

from conftest import make_device

SHAPES = [("line", k) for k in range(3, 7)] + [("ring", k) for k in range(3, 7)] + [
    ("ladder", 4), ("ladder", 6)]


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def sweep_instances():
    """|Q_L| in {2,3,4} over line/ring/ladder with 3..6 qubits, 25 fidelity draws x 10 circuits."""
    for topo, q_p in SHAPES:
        for draw in range(25):
            dev = synthetic_device(topo, q_p, 1000 * q_p + draw)
            table = build_swap_table(dev)
            for i in range(10):
                q_l = min(2 + i % 3, q_p)
                yield generate_random_cnot_circuit(q_l, 8, 10 * draw + i), dev, table


def test_criterion_1_oracle_optimality(capsys):
    start = time.perf_counter()
    total = mismatches = 0
    for circ, dev, table in sweep_instances():
        _, f = local_allocate(circ, dev, table)
        best = exhaustive_allocate(circ, dev, table).best_fidelity
        total += 1
        mismatches += abs(f - best) > 1e-12
    elapsed = time.perf_counter() - start
    report(capsys, 1, mismatches == 0 and elapsed < 60,
           f"{total - mismatches}/{total} instances match the oracle within 1e-12 in {elapsed:.1f} s")


def test_criterion_2_bound_soundness(capsys):
    rng = random.Random(2)
    checked = violations = 0
    for _ in range(1000):
        topo = rng.choice(["line", "ring", "ladder"])
        q_p = rng.choice([4, 6]) if topo == "ladder" else rng.randint(3, 6)
        dev = synthetic_device(topo, q_p, rng.randrange(2**31), f1_range=(0.99, 1.0))
        table = build_swap_table(dev)
        q_l = rng.randint(2, q_p)
        circ = generate_random_cnot_circuit(q_l, rng.randint(1, 10), rng.randrange(2**31))
        ev = BoundEvaluator(circ, dev, table)
        phys = rng.sample(range(q_p), q_l)
        order = rng.sample(range(q_l), q_l)
        chain = [Allocation.empty()]
        for l in order:
            chain.append(extend(chain[-1], l, phys[l]))
        bounds = [fidelity_bound(circ, dev, a, table) for a in chain]
        weights = [edge_weight(p, c) for p, c in zip(bounds, bounds[1:])]
        full = total_fidelity(insert_swaps(circ, dev, chain[-1], table), dev)
        ok = (all(c <= p + 1e-12 for p, c in zip(bounds, bounds[1:]))
              and all(w >= 0 for w in weights)
              and abs(sum(weights) - (bounds[0] - bounds[-1])) <= 1e-12
              and abs(bounds[-1] - full) <= 1e-12
              and abs(ev.bound(chain[-1]) - full) <= 1e-12)
        checked += 1
        violations += not ok
    report(capsys, 2, violations == 0,
           f"{checked - violations}/{checked} triples monotone, nonnegative, telescoping and exact")


def test_criterion_3_worst_case_count(capsys):
    dev = synthetic_device("complete", 4, 0, f2_range=(0.95, 0.95), f1_range=(0.999, 0.999))
    state = search_init(generate_random_cnot_circuit(3, 6, 1), dev, build_swap_table(dev))
    while state.frontier:
        search_step(state, 1000, exhaust=True)
    counts = (count_worst_case_edges(3, 4), count_worst_case_edges(2, 3))
    ok = state.children_generated == 40 and counts == (40, 9)
    report(capsys, 3, ok, f"children={state.children_generated}, count(3,4)={counts[0]}, "
                          f"count(2,3)={counts[1]}")


def test_criterion_4_hybrid_limits(capsys, fixture_device, fixture_table):
    same = total = 0
    for circ, dev, table in sweep_instances():
        budget = count_worst_case_edges(circ.num_qubits, dev.num_qubits)
        comp, _, _ = hybrid_allocate(circ, dev, table, AnnealConfig(n=budget, seed=total))
        ref, _ = local_allocate(circ, dev, table)
        total += 1
        same += comp.initial_map == ref.initial_map
    legal = 0
    for seed in range(100):
        circ = generate_random_cnot_circuit(6, 12, seed)
        comp, f, _ = hybrid_allocate(circ, fixture_device, fixture_table,
                                     AnnealConfig(n=0, seed=seed, iters_per_round=10))
        legal += (comp.initial_map.is_full(6)
                  and len(set(comp.initial_map.values())) == 6
                  and all(fixture_device.adjacent(g.control, g.target) for g in comp.expanded_gates())
                  and abs(f - total_fidelity(comp, fixture_device)) <= 1e-12)
    report(capsys, 4, same == total and legal == 100,
           f"n>=worst case: {same}/{total} identical to local search; n=0: {legal}/100 legal")


def test_criterion_5_annealing_mechanics(capsys):
    dev = synthetic_device("ring", 6, 5)
    cfg = AnnealConfig(n=1, T0=1.0, tau=12.5, iters_per_round=30, seed=8)
    _, _, trace = hybrid_allocate(generate_random_cnot_circuit(5, 12, 5), dev,
                                  build_swap_table(dev), cfg)
    worst_t = max(abs(r.temperature - cfg.T0 * math.exp(-r.s / cfg.tau)) for r in trace.records)
    rng = np.random.default_rng(55)
    draws = 10_000
    details, ok = [], worst_t <= 1e-12 and len(trace.records) > 0
    for delta, T in [(0.1, 0.1), (0.05, 0.2), (0.3, 1.0)]:
        p = math.exp(-delta / T)
        rate = sum(metropolis_accept(0.5, 0.5 - delta, T, u) for u in rng.random(draws)) / draws
        within = abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / draws)
        ok &= within
        details.append(f"(d={delta}, T={T}) {rate:.4f} vs {p:.4f}")
    report(capsys, 5, ok, f"temperature error {worst_t:.1e}; " + "; ".join(details))


def _enumerate(compiled, device):
    dist = {0: Fraction(1)}
    for g in compiled.expanded_gates():
        c, t = g.control, g.target
        eps = 1 - Fraction(device.fidelity2(c, t))
        nxt = {}
        for s, pr in dist.items():
            if s >> c & 1:
                s ^= 1 << t
            for fc, ft, w in [(0, 0, 1 - eps + eps / 4), (1, 0, eps / 4), (0, 1, eps / 4),
                              (1, 1, eps / 4)]:
                key = s ^ (fc << c) ^ (ft << t)
                nxt[key] = nxt.get(key, 0) + pr * w
        dist = nxt
    return {m: sum((pr for s, pr in dist.items() if s >> m & 1), Fraction(0))
            for m in compiled.final_map.values()}


def test_criterion_6_simulator(capsys):
    dev = make_device(2, [(0, 1, 0.98)])
    ident = Allocation({0: 0, 1: 1})
    single = CompiledCircuit((TwoQubit("cx", 0, 1),), ident, ident, (), 0)
    shots = 100_000
    rate = simulate_measured_error(single, dev, shots, seed=6).per_qubit[1]
    sigma = math.sqrt(0.01 * 0.99 / shots)
    mc_ok = abs(rate - 0.01) <= 3 * sigma

    rng = random.Random(6)
    checked = bad = 0
    for _ in range(200):
        q_p = rng.randint(3, 10)
        dev = synthetic_device(rng.choice(["line", "ring"]), q_p, rng.randrange(2**31),
                               f2_range=(0.6, 1.0))
        q_l = rng.randint(2, q_p)
        circ = generate_random_cnot_circuit(q_l, rng.randint(1, 6), rng.randrange(2**31))
        comp = insert_swaps(circ, dev, Allocation(enumerate(rng.sample(range(q_p), q_l))),
                            build_swap_table(dev))
        exact, got = _enumerate(comp, dev), expected_error(comp, dev)
        checked += 1
        bad += any(abs(got[m] - float(v)) > 1e-12 for m, v in exact.items())
    report(capsys, 6, mc_ok and bad == 0,
           f"single cx rate {rate:.5f} vs 0.01 (3 sigma {3 * sigma:.5f}); "
           f"expected_error exact on {checked - bad}/{checked} circuits")


def test_criterion_7_benchmark_analogue(capsys, fixture_device, fixture_table):
    start = time.perf_counter()
    spread = all(0.85 <= e.fidelity2 <= 0.99 for e in fixture_device.edges)
    circuits = [generate_random_cnot_circuit(10, 30, i) for i in range(20)]
    baselines = run_benchmark(circuits, fixture_device, [Strategy("identity"), Strategy("random")],
                              shots=1024, seed=0, table=fixture_table)
    ident, rand = median_error(baselines, "identity"), median_error(baselines, "random")
    try:
        res = run_benchmark(circuits, fixture_device, [Strategy("local")], shots=1024, seed=0,
                            table=fixture_table)
    except SearchResourceError as exc:
        failure = str(exc)
    else:
        failure = None
    elapsed = time.perf_counter() - start
    if failure is not None:
        report(capsys, 7, False,
               f"local search did not finish on a 10-qubit/30-CNOT circuit ({failure}) after "
               f"{elapsed:.0f} s; medians identity={ident:.4f}, random={rand:.4f}")
    local = median_error(res, "local")
    ok = spread and local <= ident and local <= 0.5 * rand and elapsed < 600
    report(capsys, 7, ok, f"medians local={local:.4f}, identity={ident:.4f}, random={rand:.4f} "
                          f"in {elapsed:.0f} s")


def test_criterion_8_reproducibility(capsys, tmp_path):
    base = ["benchmark", "--num-circuits", "3", "--qubits", "4", "--cnots", "10", "--shots", "256",
            "--seed", "12", "--iters", "10"]
    outs = []
    for name, extra in [("a", []), ("b", []), ("c", ["--jobs", "2"]), ("d", ["--jobs", "3"])]:
        path = tmp_path / f"{name}.csv"
        assert main(base + extra + ["--out", str(path)]) == 0
        outs.append(path.read_bytes())
    ok = len(set(outs)) == 1 and len(outs[0]) > 0
    report(capsys, 8, ok, f"{len(outs)} runs (jobs 1, 1, 2, 3) produced "
                          f"{len(set(outs))} distinct CSV byte strings")
