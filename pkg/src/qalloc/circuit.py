"""Gate-list IR, OpenQASM 2.0 frontend/backend and circuit analyses.

Only the subset needed by the allocator is understood: one ``qreg``, at most
one ``creg``, single-qubit gates, ``cx`` and ``measure``.  ``barrier`` is
parsed and dropped.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from .errors import QasmError, QasmUnsupportedError

if TYPE_CHECKING:
    from .allocation import CompiledCircuit
    from .device import DeviceModel


@dataclass(frozen=True)
class OneQubit:
    name: str
    target: int
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError(f"non-finite parameter in {self.name}")


@dataclass(frozen=True)
class TwoQubit:
    name: str
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError(f"{self.name} control and target coincide ({self.control})")


@dataclass(frozen=True)
class Measure:
    target: int
    clbit: int


@dataclass(frozen=True)
class Swap:
    """SWAP marker in a compiled (physical) gate list; emitted as three cx."""

    a: int
    b: int

    def as_cx(self) -> tuple[TwoQubit, TwoQubit, TwoQubit]:
        return (TwoQubit("cx", self.a, self.b), TwoQubit("cx", self.b, self.a),
                TwoQubit("cx", self.a, self.b))


Gate = Union[OneQubit, TwoQubit, Measure]


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    source_name: str = "circuit"
    num_clbits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            for q in _qubits_of(g):
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"qubit {q} out of range for {self.num_qubits}-qubit circuit")

    def two_qubit_gates(self) -> list[TwoQubit]:
        return [g for g in self.gates if isinstance(g, TwoQubit)]


def _qubits_of(g) -> tuple[int, ...]:
    if isinstance(g, TwoQubit):
        return (g.control, g.target)
    if isinstance(g, Swap):
        return (g.a, g.b)
    return (g.target,)


# ---------------------------------------------------------------------------
# Analyses


def control_counts(circuit: Circuit) -> dict[int, int]:
    """Number of two-qubit gates in which each qubit acts as the control."""
    counts = dict.fromkeys(range(circuit.num_qubits), 0)
    for g in circuit.gates:
        if isinstance(g, TwoQubit):
            counts[g.control] += 1
    return counts


def qubit_order(circuit: Circuit) -> list[int]:
    """Most-constrained-first allocation order.

    Qubits are sorted by descending control count; ties go to the lower index.
    """
    counts = control_counts(circuit)
    return sorted(counts, key=lambda q: (-counts[q], q))


def generate_random_cnot_circuit(num_qubits: int, num_cnots: int, seed: int) -> Circuit:
    """Random CNOT-only circuit; (control, target) uniform over ordered distinct pairs."""
    if num_qubits < 2:
        raise ValueError("a CNOT circuit needs at least 2 qubits")
    if num_cnots < 0:
        raise ValueError("num_cnots must be nonnegative")
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(num_cnots):
        c = int(rng.integers(num_qubits))
        t = int(rng.integers(num_qubits - 1))
        if t >= c:
            t += 1
        gates.append(TwoQubit("cx", c, t))
    return Circuit(num_qubits, tuple(gates), f"q{num_qubits}c{num_cnots}_s{seed}")


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<eqeq>==)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[\[\](){};,+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# Parser

_PARAM_COUNT = {"u1": 1, "u2": 2, "u3": 3, "U": 3, "h": 0, "x": 0, "y": 0, "z": 0,
                "s": 0, "sdg": 0, "t": 0, "tdg": 0, "id": 0}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}
_UNSUPPORTED = {"if": "classical control", "gate": "gate definitions",
                "opaque": "opaque gates", "reset": "reset"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.qreg: tuple[str, int] | None = None
        self.creg: tuple[str, int] | None = None
        self.gates: list[Gate] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None, cls=QasmError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def next(self) -> _Tok:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, kind, text=None) -> _Tok:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text is not None else kind
            got = tok.text or "end of input"
            raise self.error(f"expected {want}, got {got!r}")
        return self.next()

    def accept(self, kind, text=None) -> bool:
        if self.tok.kind == kind and (text is None or self.tok.text == text):
            self.i += 1
            return True
        return False

    def parse(self, name: str) -> Circuit:
        if self.tok.kind == "id" and self.tok.text == "OPENQASM":
            self.next()
            ver = self.next()
            if ver.kind not in ("real", "int") or not ver.text.startswith("2"):
                raise self.error(f"unsupported OpenQASM version {ver.text!r}", ver, QasmUnsupportedError)
            self.expect("sym", ";")
        while self.tok.kind != "eof":
            self.statement()
        if self.qreg is None:
            raise self.error("no qreg declared")
        return Circuit(self.qreg[1], tuple(self.gates), name,
                       self.creg[1] if self.creg else 0)

    def statement(self):
        tok = self.expect("id")
        word = tok.text
        if word in _UNSUPPORTED:
            raise self.error(f"{_UNSUPPORTED[word]} is not supported", tok, QasmUnsupportedError)
        if word == "include":
            self.expect("string")
            self.expect("sym", ";")
        elif word in ("qreg", "creg"):
            self.declaration(tok)
        elif word == "barrier":
            self.arg_list()
            self.expect("sym", ";")
        elif word == "measure":
            src = self.argument()
            self.expect("arrow")
            dst = self.argument()
            self.expect("sym", ";")
            self.measure(src, dst, tok)
        else:
            self.gate_call(tok)

    def declaration(self, tok):
        name = self.expect("id").text
        self.expect("sym", "[")
        size = int(self.expect("int").text)
        self.expect("sym", "]")
        self.expect("sym", ";")
        attr = tok.text
        if getattr(self, attr) is not None:
            raise self.error(f"multiple {attr} declarations are not supported", tok, QasmUnsupportedError)
        if self.qreg and self.qreg[0] == name or self.creg and self.creg[0] == name:
            raise self.error(f"register {name!r} redeclared", tok)
        setattr(self, attr, (name, size))

    def argument(self):
        tok = self.expect("id")
        index = None
        if self.accept("sym", "["):
            index = int(self.expect("int").text)
            self.expect("sym", "]")
        return tok, index

    def arg_list(self):
        args = [self.argument()]
        while self.accept("sym", ","):
            args.append(self.argument())
        return args

    def qubits(self, arg) -> list[int]:
        tok, index = arg
        if self.qreg is None or tok.text != self.qreg[0]:
            raise self.error(f"unknown quantum register {tok.text!r}", tok)
        size = self.qreg[1]
        if index is None:
            return list(range(size))
        if index >= size:
            raise self.error(f"qubit index {index} out of range for {tok.text}[{size}]", tok)
        return [index]

    def clbits(self, arg) -> list[int]:
        tok, index = arg
        if self.creg is None or tok.text != self.creg[0]:
            raise self.error(f"unknown classical register {tok.text!r}", tok)
        size = self.creg[1]
        if index is None:
            return list(range(size))
        if index >= size:
            raise self.error(f"bit index {index} out of range for {tok.text}[{size}]", tok)
        return [index]

    def measure(self, src, dst, tok):
        qs, cs = self.qubits(src), self.clbits(dst)
        if len(qs) != len(cs):
            raise self.error("measure register sizes differ", tok)
        self.gates.extend(Measure(q, c) for q, c in zip(qs, cs))

    def gate_call(self, tok):
        name = tok.text
        params: list[float] = []
        if self.accept("sym", "("):
            if not self.accept("sym", ")"):
                params.append(self.expression())
                while self.accept("sym", ","):
                    params.append(self.expression())
                self.expect("sym", ")")
        args = self.arg_list()
        self.expect("sym", ";")
        if name == "CX":
            name = "cx"
        if len(args) == 1:
            want = _PARAM_COUNT.get(name)
            if name == "cx":
                raise self.error("cx takes two qubit arguments", tok)
            if want is not None and want != len(params):
                raise self.error(f"{name} takes {want} parameter(s), got {len(params)}", tok)
            self.gates.extend(OneQubit(name, q, tuple(params)) for q in self.qubits(args[0]))
        elif len(args) == 2:
            if name != "cx":
                raise self.error(f"two-qubit gate {name!r} is not supported (only cx)", tok,
                                 QasmUnsupportedError)
            if params:
                raise self.error("cx takes no parameters", tok)
            if args[0][1] is None or args[1][1] is None:
                raise self.error("register broadcast on cx is not supported", tok, QasmUnsupportedError)
            (c,), (t,) = self.qubits(args[0]), self.qubits(args[1])
            if c == t:
                raise self.error("cx control and target coincide", tok)
            self.gates.append(TwoQubit("cx", c, t))
        else:
            raise self.error(f"{len(args)}-qubit gate {name!r} is not supported", tok,
                             QasmUnsupportedError)

    # expression := term (('+'|'-') term)*
    def expression(self) -> float:
        value = self.term()
        while self.tok.kind == "sym" and self.tok.text in "+-":
            op = self.next().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.factor()
        while self.tok.kind == "sym" and self.tok.text in "*/":
            op = self.next().text
            rhs = self.factor()
            if op == "/" and rhs == 0:
                raise self.error("division by zero")
            value = value * rhs if op == "*" else value / rhs
        return value

    def factor(self) -> float:
        if self.accept("sym", "-"):
            return -self.factor()
        if self.accept("sym", "+"):
            return self.factor()
        base = self.atom()
        if self.accept("sym", "^"):
            return base ** self.factor()
        return base

    def atom(self) -> float:
        tok = self.tok
        if tok.kind in ("real", "int"):
            self.next()
            return float(tok.text)
        if tok.kind == "id":
            self.next()
            if tok.text == "pi":
                return math.pi
            if tok.text in _FUNCS:
                self.expect("sym", "(")
                arg = self.expression()
                self.expect("sym", ")")
                try:
                    return _FUNCS[tok.text](arg)
                except ValueError:
                    raise self.error(f"math domain error in {tok.text}", tok) from None
            raise self.error(f"unknown identifier {tok.text!r} in expression", tok)
        if self.accept("sym", "("):
            value = self.expression()
            self.expect("sym", ")")
            return value
        raise self.error(f"unexpected {tok.text or 'end of input'!r} in expression")


def parse_qasm(text: str, source_name: str = "circuit") -> Circuit:
    """Parse OpenQASM 2.0 source into a :class:`Circuit`.

    Raises :class:`QasmError` (with line and column) on malformed input and
    :class:`QasmUnsupportedError` for constructs outside the supported subset.
    """
    return _Parser(text).parse(source_name)


# ---------------------------------------------------------------------------
# Emission


def _fmt_param(p: float) -> str:
    return repr(float(p))


def emit_qasm(compiled: CompiledCircuit, device: DeviceModel) -> str:
    n = device.num_qubits
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n}];"]
    if compiled.measures:
        nbits = max(compiled.num_clbits, 1 + max(c for _, c in compiled.measures))
        lines.append(f"creg c[{nbits}];")
    for g in compiled.physical_gates:
        if isinstance(g, Swap):
            lines.extend(f"cx q[{cx.control}],q[{cx.target}];" for cx in g.as_cx())
        elif isinstance(g, TwoQubit):
            lines.append(f"{g.name} q[{g.control}],q[{g.target}];")
        elif g.params:
            args = ",".join(_fmt_param(p) for p in g.params)
            lines.append(f"{g.name}({args}) q[{g.target}];")
        else:
            lines.append(f"{g.name} q[{g.target}];")
    lines.extend(f"measure q[{p}] -> c[{c}];" for p, c in compiled.measures)
    return "\n".join(lines) + "\n"


def emit_logical_qasm(circuit: Circuit) -> str:
    """Emit an uncompiled circuit (used by the fixture generator)."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.num_qubits}];"]
    measures = [g for g in circuit.gates if isinstance(g, Measure)]
    if measures:
        nbits = max(circuit.num_clbits, 1 + max(m.clbit for m in measures))
        lines.append(f"creg c[{nbits}];")
    for g in circuit.gates:
        if isinstance(g, TwoQubit):
            lines.append(f"{g.name} q[{g.control}],q[{g.target}];")
        elif isinstance(g, Measure):
            lines.append(f"measure q[{g.target}] -> c[{g.clbit}];")
        elif g.params:
            lines.append(f"{g.name}({','.join(_fmt_param(p) for p in g.params)}) q[{g.target}];")
        else:
            lines.append(f"{g.name} q[{g.target}];")
    return "\n".join(lines) + "\n"
