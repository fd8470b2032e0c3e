"""Command-line entry point: ``qalloc compile | benchmark | gen``.

Exit codes: 0 success, 1 parse/input error, 2 infeasible allocation,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from importlib import resources
from pathlib import Path

from . import __version__
from .allocation import total_fidelity
from .anneal import AnnealConfig, hybrid_allocate
from .benchmark import STRATEGIES, Strategy, benchmark_csv, compile_with, run_benchmark
from .circuit import emit_logical_qasm, emit_qasm, generate_random_cnot_circuit, parse_qasm
from .device import TOPOLOGIES, build_swap_table, load_calibration, synthetic_device
from .errors import (CalibrationError, InfeasibleAllocation, QallocError, QasmError,
                     SearchResourceError)

DEVICE_ENV = "QALLOC_DEVICE"
EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_RESOURCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def default_device_text() -> tuple[str, str]:
    path = os.environ.get(DEVICE_ENV)
    if path:
        return Path(path).read_text(encoding="utf-8"), path
    res = resources.files("qalloc") / "data" / "rueschlikon16.json"
    return res.read_text(encoding="utf-8"), "rueschlikon16.json (bundled)"


def _load_device(path: str | None):
    if path is None:
        text, _ = default_device_text()
    else:
        text = Path(path).read_text(encoding="utf-8")
    return load_calibration(text)


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not 0 <= lo <= hi <= 1:
        raise argparse.ArgumentTypeError(f"range {text!r} must satisfy 0 <= LO <= HI <= 1")
    return lo, hi


def _anneal_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("hybrid allocator")
    g.add_argument("--n", type=int, default=10, help="local-search pops per evaluation (default 10)")
    g.add_argument("--t0", type=float, default=10.0, help="initial temperature (default 10)")
    g.add_argument("--tau", type=float, default=25.0, help="cooling constant (default 25)")
    g.add_argument("--iters", type=int, default=50, help="Metropolis iterations per round (default 50)")
    g.add_argument("--restarts", type=int, default=1, help="independent annealing restarts (default 1)")
    g.add_argument("--max-frontier", type=int, default=2**20,
                   help="local-search frontier cap (default 2^20)")


def _config(args) -> AnnealConfig:
    return AnnealConfig(n=args.n, T0=args.t0, tau=args.tau, iters_per_round=args.iters,
                        seed=args.seed, restarts=args.restarts, max_frontier=args.max_frontier)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qalloc", description="Noise-aware qubit allocation for calibrated devices.")
    p.add_argument("--version", action="version", version=f"qalloc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compile", help="allocate and route an OpenQASM program")
    c.add_argument("qasm", help="input OpenQASM 2.0 file")
    c.add_argument("device", nargs="?", default=None,
                   help=f"calibration JSON (default: ${DEVICE_ENV} or the bundled 16-qubit ladder)")
    c.add_argument("--allocator", choices=["local", "hybrid", "identity", "random"], default="local")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--jobs", type=int, default=1, help="worker processes for restarts")
    c.add_argument("--out", help="compiled OpenQASM output (default: stdout)")
    c.add_argument("--report", help="write the JSON compile report here (default: stderr)")
    _anneal_flags(c)

    b = sub.add_parser("benchmark", help="simulated measured-error benchmark on random CNOT circuits")
    b.add_argument("device", nargs="?", default=None,
                   help=f"calibration JSON (default: ${DEVICE_ENV} or the bundled 16-qubit ladder)")
    b.add_argument("--num-circuits", type=int, default=20)
    b.add_argument("--qubits", type=int, default=10)
    b.add_argument("--cnots", type=int, default=30)
    b.add_argument("--shots", type=int, default=1024)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--allocators", default=",".join(STRATEGIES),
                   help=f"comma-separated subset of {','.join(STRATEGIES)}")
    b.add_argument("--out", help="CSV output (default: stdout)")
    _anneal_flags(b)

    g = sub.add_parser("gen", help="generate a random circuit or synthetic calibration")
    gsub = g.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    gc = gsub.add_parser("circuit", help="random CNOT-only OpenQASM circuit")
    gc.add_argument("--qubits", type=int, default=10)
    gc.add_argument("--cnots", type=int, default=30)
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--out")
    gd = gsub.add_parser("device", help="synthetic calibration JSON")
    gd.add_argument("--topology", choices=TOPOLOGIES, default="ladder")
    gd.add_argument("--qubits", type=int, default=16)
    gd.add_argument("--rows", type=int, help="grid rows")
    gd.add_argument("--f2", type=_range, default=(0.85, 0.99), help="cx fidelity range LO:HI")
    gd.add_argument("--f1", type=_range, default=(0.998, 0.9995), help="1q fidelity range LO:HI")
    gd.add_argument("--readout", type=_range, default=None, help="readout fidelity range LO:HI")
    gd.add_argument("--name")
    gd.add_argument("--seed", type=int, default=0)
    gd.add_argument("--out")
    return p


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_compile(args) -> int:
    qasm_path = Path(args.qasm)
    circuit = parse_qasm(qasm_path.read_text(encoding="utf-8"), qasm_path.name)
    device = _load_device(args.device)
    table = build_swap_table(device)
    config = _config(args)
    start = time.perf_counter()
    if args.allocator == "hybrid":
        compiled, _, _ = hybrid_allocate(circuit, device, table, config, jobs=args.jobs)
    else:
        compiled = compile_with(Strategy(args.allocator, config), circuit, device, table, args.seed)
    elapsed = time.perf_counter() - start
    text = emit_qasm(compiled, device)
    _write(text, args.out)
    n1, n2 = compiled.gate_counts()
    report = {
        "input": qasm_path.name,
        "device": device.name,
        "allocator": args.allocator,
        "params": {"n": config.n, "t0": config.T0, "tau": config.tau,
                   "iters": config.iters_per_round, "restarts": config.restarts,
                   "seed": config.seed},
        "initial_map": {str(l): p for l, p in compiled.initial_map.items()},
        "final_map": {str(l): p for l, p in compiled.final_map.items()},
        "swap_count": compiled.swap_count,
        "n1": n1,
        "n2": n2,
        "f_tot": total_fidelity(compiled, device),
        "wall_time": elapsed,
    }
    payload = json.dumps(report, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(payload, encoding="utf-8")
    else:
        sys.stderr.write(payload)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    device = _load_device(args.device)
    names = [s.strip() for s in args.allocators.split(",") if s.strip()]
    unknown = set(names) - set(STRATEGIES)
    if unknown or not names:
        raise ValueError(f"unknown allocators: {', '.join(sorted(unknown)) or '(none)'}")
    if args.qubits < 2:
        raise ValueError("--qubits must be at least 2")
    config = _config(args)
    circuits = [generate_random_cnot_circuit(args.qubits, args.cnots, args.seed * 1000 + i)
                for i in range(args.num_circuits)]
    results = run_benchmark(circuits, device, [Strategy(n, config) for n in names],
                            args.shots, args.seed, jobs=args.jobs)
    _write(benchmark_csv(results), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "circuit":
        if args.qubits < 2 or args.cnots < 0:
            raise ValueError("need --qubits >= 2 and --cnots >= 0")
        circuit = generate_random_cnot_circuit(args.qubits, args.cnots, args.seed)
        _write(emit_logical_qasm(circuit), args.out)
    else:
        device = synthetic_device(args.topology, args.qubits, args.seed, args.f2, args.f1,
                                  args.readout, args.rows, args.name)
        _write(device.to_json(), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"compile": cmd_compile, "benchmark": cmd_benchmark, "gen": cmd_gen}[args.command]
    try:
        return handler(args)
    except (QasmError, CalibrationError, OSError, ValueError) as exc:
        print(f"qalloc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleAllocation as exc:
        print(f"qalloc: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SearchResourceError as exc:
        print(f"qalloc: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except QallocError as exc:
        print(f"qalloc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
