"""Noise-aware qubit allocation: exact Dijkstra search and a hybrid annealer."""

__version__ = "0.1.0"

from .allocation import (Allocation, BoundEvaluator, CompiledCircuit, edge_weight, extend,
                         fidelity_bound, insert_swaps, total_fidelity)
from .anneal import (AnnealConfig, AnnealTrace, hybrid_allocate, metropolis_accept, propose,
                     temperature)
from .benchmark import Strategy, benchmark_csv, run_benchmark
from .circuit import (Circuit, Measure, OneQubit, Swap, TwoQubit, control_counts, emit_qasm,
                      generate_random_cnot_circuit, parse_qasm, qubit_order)
from .device import (CouplingEdge, DeviceModel, PhysicalQubit, SwapPathTable,
                     best_gate_fidelities, build_swap_table, load_calibration, swap_fidelity,
                     synthetic_device)
from .noise import ErrorReport, expected_error, simulate_measured_error
from .oracle import OracleResult, count_worst_case_edges, exhaustive_allocate
from .search import SearchNode, SearchState, local_allocate, search_init, search_step

__all__ = [
    "Allocation", "AnnealConfig", "AnnealTrace", "BoundEvaluator", "Circuit", "CompiledCircuit",
    "CouplingEdge", "DeviceModel", "ErrorReport", "Measure", "OneQubit", "OracleResult",
    "PhysicalQubit", "SearchNode", "SearchState", "Strategy", "Swap", "SwapPathTable", "TwoQubit",
    "benchmark_csv", "best_gate_fidelities", "build_swap_table", "control_counts",
    "count_worst_case_edges", "edge_weight", "emit_qasm", "exhaustive_allocate", "expected_error",
    "extend", "fidelity_bound", "generate_random_cnot_circuit", "hybrid_allocate", "insert_swaps",
    "load_calibration", "local_allocate", "metropolis_accept", "parse_qasm", "propose",
    "qubit_order", "run_benchmark", "search_init", "search_step", "simulate_measured_error",
    "swap_fidelity", "synthetic_device", "temperature", "total_fidelity",
]
