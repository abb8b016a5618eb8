"""Compile discriminator models to circuits, plus the 2-bit reference suite."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import qcore
from .discriminator import DiscriminatorModel, ModelError, MAX_DENSE_FEATURES, build_unitary, train
from .qcore import Circuit, GateOp


def synthesize(model: DiscriminatorModel) -> Circuit:
    """One multi-controlled X on the prediction qubit per set block, ascending ``j``.

    Control ``i`` is closed where bit ``i`` of pattern ``j - 1`` is 1 and
    open where it is 0.
    """
    b = model.b
    gates = []
    for j in model.theta_ones():
        pattern = format(j - 1, f"0{b}b")
        gates.append(GateOp.mcx(((i, bit == "1") for i, bit in enumerate(pattern)), b))
    return Circuit(b + 1, tuple(gates))


def circuit_predict(circuit: Circuit, x) -> int:
    """Run ``circuit`` on ``|x 0>`` through the state-vector simulator and read ``p``."""
    state = qcore.basis_state([*(int(v) for v in x), 0])
    return qcore.readout(qcore.run_circuit(circuit, state))[-1]


def verify_model_circuit(model: DiscriminatorModel, circuit: Circuit) -> bool:
    """True iff the circuit's unitary equals the model's matrix entry for entry."""
    if model.b > MAX_DENSE_FEATURES:
        raise ModelError(f"verification is capped at b = {MAX_DENSE_FEATURES}, got {model.b}")
    if circuit.num_qubits != model.b + 1:
        return False
    return bool(np.array_equal(qcore.circuit_to_unitary(circuit), build_unitary(model)))


TWO_BIT_POINTS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class AppendixFixture:
    case_id: int
    labeling: dict
    reference_circuit: Circuit
    reference_unitary: np.ndarray

    @property
    def features(self) -> np.ndarray:
        return np.array(TWO_BIT_POINTS, dtype=np.uint8)

    @property
    def labels(self) -> np.ndarray:
        return np.array([self.labeling[p] for p in TWO_BIT_POINTS], dtype=np.int8)


# Hand-built circuits for the 16 labelings of the unit square, transcribed
# gate for gate. q0 = x1, q1 = x2, p = prediction qubit.
_REFERENCE_CIRCUITS = {
    1: "",
    2: "CX q0 p\nCX q1 p\nCCX q0 q1 p\nX p\n",
    3: "X q0\nCCX q0 q1 p\nX q0\n",
    4: "X q1\nCCX q0 q1 p\nX q1\n",
    5: "CCX q0 q1 p\n",
    6: "CX q0 p\nX p\n",
    7: "CX q1 p\nX p\n",
    8: "CX q0 p\nCX q1 p\nX p\n",
    9: "CX q0 p\nCX q1 p\n",
    10: "CX q1 p\n",
    11: "CX q0 p\n",
    12: "CCX q0 q1 p\nX p\n",
    13: "X q1\nCCX q0 q1 p\nX q1\nX p\n",
    14: "X q0\nCCX q0 q1 p\nX q0\nX p\n",
    15: "CX q0 p\nCX q1 p\nCCX q0 q1 p\n",
    16: "X p\n",
}

# Reference 8x8 matrices, written as the 2x2 block pattern along the
# diagonal ("I" or "X") for the points (0,0), (0,1), (1,0), (1,1).
_REFERENCE_BLOCKS = {
    1: "IIII",
    2: "XIII",
    3: "IXII",
    4: "IIXI",
    5: "IIIX",
    6: "XXII",
    7: "XIXI",
    8: "XIIX",
    9: "IXXI",
    10: "IXIX",
    11: "IIXX",
    12: "XXXI",
    13: "XXIX",
    14: "XIXX",
    15: "IXXX",
    16: "XXXX",
}

_BLOCK = {"I": np.eye(2, dtype=np.complex128), "X": np.array([[0, 1], [1, 0]], dtype=np.complex128)}


def _block_diag(pattern: str) -> np.ndarray:
    mat = np.zeros((8, 8), dtype=np.complex128)
    for k, c in enumerate(pattern):
        mat[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = _BLOCK[c]
    return mat


def appendix_fixtures() -> list[AppendixFixture]:
    fixtures = []
    for case_id in range(1, 17):
        blocks = _REFERENCE_BLOCKS[case_id]
        labeling = {p: int(c == "X") for p, c in zip(TWO_BIT_POINTS, blocks)}
        fixtures.append(
            AppendixFixture(
                case_id=case_id,
                labeling=labeling,
                reference_circuit=qcore.parse_circuit(_REFERENCE_CIRCUITS[case_id], num_features=2),
                reference_unitary=_block_diag(blocks),
            )
        )
    return fixtures


@dataclass(frozen=True)
class FixtureCheck:
    case_id: int
    training_accuracy: float
    trained_matrix_ok: bool
    synthesized_ok: bool
    reference_ok: bool
    reference_labels_ok: bool

    @property
    def passed(self) -> bool:
        return (
            self.training_accuracy == 1.0
            and self.trained_matrix_ok
            and self.synthesized_ok
            and self.reference_ok
            and self.reference_labels_ok
        )


def check_fixture(fixture: AppendixFixture) -> FixtureCheck:
    """Train on the four labeled points and cross-check model, matrix and both circuits."""
    X, y = fixture.features, fixture.labels
    model = train(X, y)
    synthesized = synthesize(model)
    preds = [circuit_predict(synthesized, x) for x in X]
    reference_preds = [circuit_predict(fixture.reference_circuit, x) for x in X]
    return FixtureCheck(
        case_id=fixture.case_id,
        training_accuracy=float(np.mean(np.array(preds) == y)),
        trained_matrix_ok=bool(np.array_equal(build_unitary(model), fixture.reference_unitary)),
        synthesized_ok=verify_model_circuit(model, synthesized),
        reference_ok=verify_model_circuit(model, fixture.reference_circuit),
        reference_labels_ok=reference_preds == list(y),
    )


def all_patterns(b: int) -> np.ndarray:
    """Every point of the b-dimensional hypercube, in block order."""
    return np.array(list(itertools.product((0, 1), repeat=b)), dtype=np.uint8)
