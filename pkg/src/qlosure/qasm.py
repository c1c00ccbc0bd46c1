"""OpenQASM 2.0 subset reader/writer.

Registers are flattened in declaration order, so ``qreg a[2]; qreg b[3];``
gives logical qubits 0-1 for ``a`` and 2-4 for ``b``. Custom gate
definitions, classical conditionals and gates on three or more qubits are
rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .circuit import Circuit, Gate

# name -> (num qubits, num params)
GATES: dict[str, tuple[int, int]] = {
    "id": (1, 0), "x": (1, 0), "y": (1, 0), "z": (1, 0), "h": (1, 0),
    "s": (1, 0), "sdg": (1, 0), "t": (1, 0), "tdg": (1, 0),
    "sx": (1, 0), "sxdg": (1, 0), "reset": (1, 0),
    "rx": (1, 1), "ry": (1, 1), "rz": (1, 1), "p": (1, 1), "u1": (1, 1),
    "u2": (1, 2), "u3": (1, 3), "u": (1, 3),
    "cx": (2, 0), "cy": (2, 0), "cz": (2, 0), "ch": (2, 0), "swap": (2, 0), "csx": (2, 0),
    "crx": (2, 1), "cry": (2, 1), "crz": (2, 1), "cu1": (2, 1), "cp": (2, 1),
    "rxx": (2, 1), "ryy": (2, 1), "rzz": (2, 1), "cu3": (2, 3), "cu": (2, 4),
}
WIDE_GATES = {"ccx": 3, "cswap": 3, "rccx": 3, "rc3x": 4, "c3x": 4, "c3sqrtx": 4, "c4x": 5}
ALIASES = {"CX": "cx", "U": "u3"}
FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
         "ln": math.log, "sqrt": math.sqrt}


class QasmError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{message} (line {line}, column {col})" if line else message)


@dataclass
class _Tok:
    kind: str
    value: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<eqeq>==)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[\[\](),;+\-*/^{}])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
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


class _Parser:
    def __init__(self, text: str, name: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.name = name
        self.qregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
        self.cregs: dict[str, tuple[int, int]] = {}
        self.nq = 0
        self.nc = 0
        self.gates: list[Gate] = []

    # -- token helpers -------------------------------------------------
    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> _Tok:
        tok = self.next()
        if tok.value != value:
            shown = tok.value or "end of input"
            raise QasmError(f"expected {value!r}, found {shown!r}", tok.line, tok.col)
        return tok

    def expect_kind(self, kind: str) -> _Tok:
        tok = self.next()
        if tok.kind != kind:
            shown = tok.value or "end of input"
            raise QasmError(f"expected {kind}, found {shown!r}", tok.line, tok.col)
        return tok

    # -- statements ----------------------------------------------------
    def parse(self) -> Circuit:
        if self.peek().value == "OPENQASM":
            self.next()
            ver = self.next()
            if ver.kind not in ("real", "int") or not ver.value.startswith("2"):
                raise QasmError(f"unsupported OpenQASM version {ver.value!r}", ver.line, ver.col)
            self.expect(";")
        while self.peek().kind != "eof":
            self.statement()
        return Circuit(self.nq, self.gates, self.name, self.nc)

    def statement(self) -> None:
        tok = self.peek()
        if tok.kind != "id":
            raise QasmError(f"unexpected token {tok.value!r}", tok.line, tok.col)
        word = tok.value
        if word == "include":
            self.next()
            self.expect_kind("string")
            self.expect(";")
        elif word in ("qreg", "creg"):
            self.declare(word)
        elif word in ("gate", "opaque"):
            raise QasmError("custom gate definitions are not supported", tok.line, tok.col)
        elif word == "if":
            raise QasmError("classical conditionals are not supported", tok.line, tok.col)
        elif word == "barrier":
            self.next()
            args = self.arglist(self.qregs)
            qubits: list[int] = []
            for arg in args:
                qubits.extend(arg)
            if len(set(qubits)) != len(qubits):
                raise QasmError("duplicate operand in barrier", tok.line, tok.col)
            self.expect(";")
            self.emit("barrier", qubits, (), ())
        elif word == "measure":
            self.next()
            src = self.argument(self.qregs)
            self.expect("->")
            dst = self.argument(self.cregs)
            self.expect(";")
            if len(src) != len(dst):
                raise QasmError("measure register sizes differ", tok.line, tok.col)
            for q, c in zip(src, dst):
                self.emit("measure", [q], (), (c,))
        else:
            self.application()

    def declare(self, word: str) -> None:
        self.next()
        name = self.expect_kind("id")
        self.expect("[")
        size = int(self.expect_kind("int").value)
        self.expect("]")
        self.expect(";")
        regs = self.qregs if word == "qreg" else self.cregs
        if name.value in self.qregs or name.value in self.cregs:
            raise QasmError(f"register {name.value!r} redeclared", name.line, name.col)
        if word == "qreg":
            regs[name.value] = (self.nq, size)
            self.nq += size
        else:
            regs[name.value] = (self.nc, size)
            self.nc += size

    def application(self) -> None:
        tok = self.next()
        name = ALIASES.get(tok.value, tok.value)
        if name in WIDE_GATES:
            raise QasmError(
                f"unsupported gate arity: {tok.value} acts on {WIDE_GATES[name]} qubits",
                tok.line, tok.col)
        if name not in GATES:
            raise QasmError(f"unsupported gate {tok.value!r}", tok.line, tok.col)
        arity, nparams = GATES[name]
        params: tuple[float, ...] = ()
        if self.peek().value == "(":
            self.next()
            values = []
            if self.peek().value != ")":
                values.append(self.expr())
                while self.peek().value == ",":
                    self.next()
                    values.append(self.expr())
            self.expect(")")
            params = tuple(values)
        if len(params) != nparams:
            raise QasmError(f"{tok.value} takes {nparams} parameter(s), got {len(params)}",
                            tok.line, tok.col)
        args = self.arglist(self.qregs)
        self.expect(";")
        if len(args) != arity:
            raise QasmError(f"unsupported gate arity: {tok.value} expects {arity} operand(s), "
                            f"got {len(args)}", tok.line, tok.col)
        width = {len(a) for a in args if len(a) > 1}
        if len(width) > 1:
            raise QasmError("register size mismatch in broadcast", tok.line, tok.col)
        reps = width.pop() if width else 1
        for r in range(reps):
            qubits = [a[r] if len(a) > 1 else a[0] for a in args]
            if len(set(qubits)) != len(qubits):
                raise QasmError(f"duplicate operand in {tok.value}", tok.line, tok.col)
            self.emit(name, qubits, params, ())

    def emit(self, name, qubits, params, cbits) -> None:
        self.gates.append(Gate(len(self.gates), name, tuple(qubits), tuple(params), tuple(cbits)))

    def arglist(self, regs) -> list[list[int]]:
        args = [self.argument(regs)]
        while self.peek().value == ",":
            self.next()
            args.append(self.argument(regs))
        return args

    def argument(self, regs) -> list[int]:
        tok = self.expect_kind("id")
        if tok.value not in regs:
            raise QasmError(f"undeclared register {tok.value!r}", tok.line, tok.col)
        offset, size = regs[tok.value]
        if self.peek().value != "[":
            return list(range(offset, offset + size))
        self.next()
        idx = self.expect_kind("int")
        self.expect("]")
        k = int(idx.value)
        if k >= size:
            raise QasmError(f"operand {k} out of range for {tok.value}[{size}]", idx.line, idx.col)
        return [offset + k]

    # -- parameter expressions -----------------------------------------
    def expr(self) -> float:
        value = self.term()
        while self.peek().value in ("+", "-"):
            op = self.next().value
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.factor()
        while self.peek().value in ("*", "/"):
            op = self.next()
            rhs = self.factor()
            if op.value == "/" and rhs == 0:
                raise QasmError("division by zero", op.line, op.col)
            value = value * rhs if op.value == "*" else value / rhs
        return value

    def factor(self) -> float:
        if self.peek().value in ("-", "+"):
            sign = -1.0 if self.next().value == "-" else 1.0
            return sign * self.factor()
        base = self.atom()
        if self.peek().value == "^":
            self.next()
            return base ** self.factor()
        return base

    def atom(self) -> float:
        tok = self.next()
        if tok.kind in ("real", "int"):
            return float(tok.value)
        if tok.value == "pi":
            return math.pi
        if tok.value == "(":
            value = self.expr()
            self.expect(")")
            return value
        if tok.value in FUNCS:
            self.expect("(")
            value = self.expr()
            self.expect(")")
            return FUNCS[tok.value](value)
        raise QasmError(f"bad parameter expression near {tok.value!r}", tok.line, tok.col)


def parse_qasm(text: str, name: str = "circuit") -> Circuit:
    """Parse OpenQASM 2.0 text into a :class:`Circuit`; raises :class:`QasmError`."""
    return _Parser(text, name).parse()


def load_qasm(path) -> Circuit:
    path = Path(path)
    return parse_qasm(path.read_text(encoding="utf-8"), name=path.stem)


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_qasm(circuit: Circuit, header_comment: str = "") -> str:
    lines = []
    for text in header_comment.splitlines():
        lines.append(f"// {text}" if text else "//")
    lines += ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if circuit.num_qubits:
        lines.append(f"qreg q[{circuit.num_qubits}];")
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for g in circuit.gates:
        if g.name == "measure":
            lines.append(f"measure q[{g.qubits[0]}] -> c[{g.cbits[0]}];")
            continue
        head = g.name
        if g.params:
            head += "(" + ",".join(_fmt(p) for p in g.params) + ")"
        lines.append(f"{head} " + ",".join(f"q[{q}]" for q in g.qubits) + ";")
    return "\n".join(lines) + "\n"
