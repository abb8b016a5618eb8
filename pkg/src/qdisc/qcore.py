"""Dense state-vector simulator for X-family circuits.

Qubit 0 is the most significant bit of the amplitude index and the
prediction qubit is the last (least significant) one, so the basis index
of ``|x p>`` is ``2 * int(x) + p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

GATE_KINDS = ("X", "CX", "CCX", "MCX")
MAX_DENSE_QUBITS = 12
NORM_ATOL = 1e-12
BASIS_ATOL = 1e-9


class CircuitError(ValueError):
    """Raised for malformed gates, circuits or circuit text."""


@dataclass(frozen=True)
class GateOp:
    """An X gate with zero or more controls.

    ``controls`` holds ``(qubit, closed)`` pairs; a closed control fires
    on 1 and an open control fires on 0.
    """

    kind: str
    target: int
    controls: tuple[tuple[int, bool], ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        controls = tuple((int(q), bool(c)) for q, c in self.controls)
        object.__setattr__(self, "controls", controls)
        qubits = [q for q, _ in controls]
        if self.target < 0 or any(q < 0 for q in qubits):
            raise CircuitError("qubit indices must be non-negative")
        if self.target in qubits:
            raise CircuitError("target qubit is also a control")
        if len(set(qubits)) != len(qubits):
            raise CircuitError("duplicate control qubit")
        arity = {"X": 0, "CX": 1, "CCX": 2}
        if self.kind in arity:
            if len(controls) != arity[self.kind]:
                raise CircuitError(
                    f"{self.kind} takes {arity[self.kind]} control(s), got {len(controls)}"
                )
            if not all(c for _, c in controls):
                raise CircuitError(f"{self.kind} controls must all be closed")

    @classmethod
    def x(cls, target: int) -> "GateOp":
        return cls("X", target)

    @classmethod
    def cx(cls, control: int, target: int) -> "GateOp":
        return cls("CX", target, ((control, True),))

    @classmethod
    def ccx(cls, c1: int, c2: int, target: int) -> "GateOp":
        return cls("CCX", target, ((c1, True), (c2, True)))

    @classmethod
    def mcx(cls, controls: Iterable[tuple[int, bool]], target: int) -> "GateOp":
        """Multi-controlled X, narrowed to X/CX/CCX when every control is closed."""
        controls = tuple(controls)
        if all(c for _, c in controls) and len(controls) <= 2:
            kind = ("X", "CX", "CCX")[len(controls)]
            return cls(kind, target, controls)
        return cls("MCX", target, controls)

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target, *(q for q, _ in self.controls))


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[GateOp, ...] = ()

    def __post_init__(self):
        if self.num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            if max(gate.qubits) >= self.num_qubits:
                raise CircuitError(
                    f"gate {gate} addresses a qubit outside a {self.num_qubits}-qubit register"
                )

    def __len__(self):
        return len(self.gates)


class StateVector:
    """Normalized complex amplitudes over ``num_qubits`` qubits (read-only)."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes, num_qubits: int | None = None, *, check: bool = True):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        n = int(amps.size).bit_length() - 1
        if num_qubits is None:
            num_qubits = n
        if num_qubits < 1 or amps.size != 2**num_qubits:
            raise ValueError(
                f"expected 2**num_qubits amplitudes, got {amps.size} for {num_qubits} qubit(s)"
            )
        if check:
            norm = float(np.sum(np.abs(amps) ** 2))
            if abs(norm - 1.0) > NORM_ATOL:
                raise ValueError(f"state is not normalized (|psi|^2 = {norm!r})")
        amps.flags.writeable = False
        self.num_qubits = num_qubits
        self.amplitudes = amps

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.num_qubits == other.num_qubits and np.array_equal(
            self.amplitudes, other.amplitudes
        )

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"


def basis_state(bits: Sequence[int]) -> StateVector:
    """Computational basis state with ``bits[0]`` as the most significant bit."""
    bits = [int(b) for b in bits]
    if not bits:
        raise ValueError("bits must be non-empty")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"bits must be 0/1, got {bits}")
    index = int("".join(map(str, bits)), 2)
    amps = np.zeros(2 ** len(bits), dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps, len(bits), check=False)


def _apply_to_array(arr: np.ndarray, gate: GateOp, num_qubits: int) -> np.ndarray:
    # arr has 2**num_qubits rows; any trailing axes are batch axes.
    tensor = arr.reshape((2,) * num_qubits + arr.shape[1:])
    out = tensor.copy()
    index: list = [slice(None)] * tensor.ndim
    for q, closed in gate.controls:
        index[q] = 1 if closed else 0
    lo, hi = list(index), list(index)
    lo[gate.target], hi[gate.target] = 0, 1
    lo, hi = tuple(lo), tuple(hi)
    out[lo] = tensor[hi]
    out[hi] = tensor[lo]
    return out.reshape(arr.shape)


def _check_gate(gate: GateOp, num_qubits: int) -> None:
    if max(gate.qubits) >= num_qubits:
        raise IndexError(f"gate {gate} out of range for {num_qubits} qubit(s)")


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    _check_gate(gate, state.num_qubits)
    amps = _apply_to_array(state.amplitudes, gate, state.num_qubits)
    return StateVector(amps, state.num_qubits, check=False)


def run_circuit(circuit: Circuit, state: StateVector) -> StateVector:
    if circuit.num_qubits != state.num_qubits:
        raise CircuitError(
            f"circuit has {circuit.num_qubits} qubits but the input state has {state.num_qubits}"
        )
    amps = state.amplitudes
    for gate in circuit.gates:
        amps = _apply_to_array(amps, gate, circuit.num_qubits)
    return StateVector(amps, circuit.num_qubits, check=False)


def circuit_to_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary whose column k is the circuit applied to basis state k."""
    n = circuit.num_qubits
    if n > MAX_DENSE_QUBITS:
        raise CircuitError(f"dense materialization is capped at {MAX_DENSE_QUBITS} qubits, got {n}")
    mat = np.eye(2**n, dtype=np.complex128)
    for gate in circuit.gates:
        mat = _apply_to_array(mat, gate, n)
    return mat


def readout(state: StateVector) -> list[int]:
    """Bit-string of a computational basis state (deterministic, no sampling)."""
    probs = np.abs(state.amplitudes) ** 2
    index = int(np.argmax(probs))
    if abs(probs[index] - 1.0) > BASIS_ATOL:
        raise ValueError("state is not a computational basis state; readout is undefined")
    return [int(c) for c in format(index, f"0{state.num_qubits}b")]


def apply_gate_to_indices(indices: np.ndarray, gate: GateOp, num_qubits: int) -> np.ndarray:
    """Action of ``gate`` on an array of basis-state indices.

    Every gate here is a permutation of the computational basis, so basis
    inputs can be pushed through a circuit without touching amplitudes.
    """
    _check_gate(gate, num_qubits)
    indices = np.asarray(indices, dtype=np.int64)
    fire = np.ones(indices.shape, dtype=bool)
    for q, closed in gate.controls:
        bit = (indices >> (num_qubits - 1 - q)) & 1
        fire &= bit == int(closed)
    mask = np.int64(1) << (num_qubits - 1 - gate.target)
    return np.where(fire, indices ^ mask, indices)


def is_permutation_matrix(mat: np.ndarray) -> bool:
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    if not np.all((mat == 0) | (mat == 1)):
        return False
    return bool(np.all(mat.sum(axis=0) == 1) and np.all(mat.sum(axis=1) == 1))


def is_unitary(mat: np.ndarray, atol: float = 0.0) -> bool:
    """``U^H U == U U^H == I``; exact comparison when ``atol`` is 0."""
    mat = np.asarray(mat)
    ident = np.eye(mat.shape[0])
    left = mat.conj().T @ mat
    right = mat @ mat.conj().T
    if atol == 0.0:
        return bool(np.array_equal(left, ident) and np.array_equal(right, ident))
    return bool(np.allclose(left, ident, atol=atol) and np.allclose(right, ident, atol=atol))


# Circuit text format: one gate per line, feature qubits q0..q{b-1}, prediction
# qubit p, "!" marks an open control, "#" starts a comment line.


def qubit_name(index: int, num_qubits: int) -> str:
    return "p" if index == num_qubits - 1 else f"q{index}"


def _parse_qubit(token: str, lineno: int) -> int | None:
    if token == "p":
        return None
    if len(token) > 1 and token[0] == "q" and token[1:].isdigit():
        return int(token[1:])
    raise CircuitError(f"line {lineno}: bad qubit name {token!r}")


def format_circuit(circuit: Circuit) -> str:
    lines = []
    n = circuit.num_qubits
    for gate in circuit.gates:
        ctrls = [("" if closed else "!") + qubit_name(q, n) for q, closed in gate.controls]
        lines.append(" ".join([gate.kind, *ctrls, qubit_name(gate.target, n)]))
    return "".join(line + "\n" for line in lines)


def parse_circuit(text: str, num_features: int | None = None) -> Circuit:
    """Parse the circuit text format.

    The register is ``num_features + 1`` qubits; when ``num_features`` is
    omitted it is inferred from the highest ``q<i>`` mentioned (at least 1).
    """
    parsed = []
    highest = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, *operands = line.split()
        if kind not in GATE_KINDS:
            raise CircuitError(f"line {lineno}: unknown gate {kind!r}")
        if not operands:
            raise CircuitError(f"line {lineno}: {kind} needs a target")
        ops = []
        for pos, tok in enumerate(operands):
            closed = not tok.startswith("!")
            q = _parse_qubit(tok.lstrip("!"), lineno)
            if not closed and pos == len(operands) - 1:
                raise CircuitError(f"line {lineno}: the target cannot be an open control")
            if not closed and kind != "MCX":
                raise CircuitError(f"line {lineno}: open controls are only allowed on MCX")
            if q is not None:
                highest = max(highest, q)
            ops.append((q, closed))
        parsed.append((lineno, kind, ops))

    b = num_features if num_features is not None else max(highest + 1, 1)
    if highest >= b:
        raise CircuitError(f"circuit mentions q{highest} but the register has {b} feature qubit(s)")
    n = b + 1

    def resolve(q):
        return n - 1 if q is None else q

    gates = []
    for lineno, kind, ops in parsed:
        *ctrls, (tgt, _) = ops
        try:
            gates.append(GateOp(kind, resolve(tgt), tuple((resolve(q), c) for q, c in ctrls)))
        except CircuitError as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    return Circuit(n, tuple(gates))
