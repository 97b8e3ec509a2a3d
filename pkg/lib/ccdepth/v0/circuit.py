# Copyright 2022 Canonical Ltd.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Layered circuit representation, commutation oracle and exact simulators.

A circuit is a sequence of layers, and each layer is a set of gates that pairwise
commute. The number of layers is the commutative depth of the circuit. The gate set is
the generalized CNOTs (`Cnot`, `Cz`, `Cy`) together with the 24 single-qubit Clifford
gates (`SingleQubit` carrying a `Clifford1Q`).

### Building circuits

Synthesizers should use the `CircuitBuilder`, which packs a new layer into the previous
one whenever every gate of both still commutes, cancels repeated self-inverse gates, and
tracks register relabelings as a wire frame instead of emitting SWAP gates:

```python

from ccdepth.v0.circuit import CircuitBuilder, Cnot, to_linear_matrix

builder = CircuitBuilder(4)
builder.add_layer([Cnot(0, 2), Cnot(1, 3)])
builder.swap_registers([0, 1], [2, 3])
builder.add_layer([Cnot(0, 2)])
circuit = builder.finish()  # fails unless the frame is back to the identity
```

### Simulation

`to_linear_matrix` returns the binary matrix of a CNOT-only circuit and `to_tableau`
returns the `CliffordTableau` of any circuit over the gate set:

```python

from ccdepth.v0.circuit import H, SingleQubit, LayeredCircuit, to_tableau

tableau = to_tableau(LayeredCircuit(1, ((SingleQubit(0, H),),)))
```

### Text format

Circuits are stored as UTF-8 text, one gate per line, with `#` comments:

    # ccdepth v1
    QUBITS 3
    LAYER
    CNOT 0 2
    CNOT 1 2
    LAYER
    SQ 0 X:+Z Z:+X

Tableaux use `QUBITS n`, then 2n rows of 2n bits (images of X1..Xn then Z1..Zn, each as
x-bits followed by z-bits) and one row of 2n sign bits.
"""

import logging
from collections import deque, namedtuple
from functools import lru_cache
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from ccdepth.v0.gf2 import BinMatrix, DimensionError, inverse

# Increment this major API version when introducing breaking changes
LIBAPI = 0

# Increment this PATCH version before releasing, or reset
# to 0 if you are raising the major API version
LIBPATCH = 5

logger = logging.getLogger(__name__)

FORMAT_HEADER = "# ccdepth v1"

_LETTER_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_CYCLIC = {("X", "Y"), ("Y", "Z"), ("Z", "X")}


class UnsupportedGateError(ValueError):
    """Raised when a simulator meets a gate it cannot represent."""


class LayerMergeError(ValueError):
    """Raised when two addition layers cannot be merged into one."""


class CircuitParseError(ValueError):
    """Raised on malformed circuit text; `line` holds the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TableauParseError(ValueError):
    """Raised on malformed tableau text."""


class InvalidTableauError(ValueError):
    """Raised when a tableau violates the symplectic condition."""


def _parse_signed(text: str) -> Tuple[int, str]:
    if len(text) != 2 or text[0] not in "+-" or text[1] not in _LETTER_BITS:
        raise ValueError(f"{text!r} is not a signed Pauli such as +X or -Z")
    return (1 if text[0] == "+" else -1), text[1]


class Clifford1Q(namedtuple("Clifford1Q", ["image_x", "image_z"])):
    """Single-qubit Clifford gate, given by the signed images of X and Z.

    Images are strings such as `"+Z"` or `"-Y"`. The two letters must differ, which
    leaves exactly 24 elements; global phase is not represented.
    """

    __slots__ = ()

    def __new__(cls, image_x: str, image_z: str):
        _, letter_x = _parse_signed(image_x)
        _, letter_z = _parse_signed(image_z)
        if letter_x == letter_z:
            raise ValueError(f"images {image_x} and {image_z} commute")
        return super().__new__(cls, image_x, image_z)

    @classmethod
    def parse(cls, image_x: str, image_z: str) -> "Clifford1Q":
        """Parse the `X:+Z Z:+X` serialized form, given as its two tokens."""
        if not image_x.startswith("X:") or not image_z.startswith("Z:"):
            raise ValueError(f"expected X:<image> Z:<image>, got {image_x} {image_z}")
        return cls(image_x[2:], image_z[2:])

    def conjugate(self, letter: str) -> Tuple[int, str]:
        """Signed image of a Pauli letter (one of I, X, Y, Z) under this gate."""
        if letter == "I":
            return 1, "I"
        sign_x, letter_x = _parse_signed(self.image_x)
        sign_z, letter_z = _parse_signed(self.image_z)
        if letter == "X":
            return sign_x, letter_x
        if letter == "Z":
            return sign_z, letter_z
        if letter != "Y":
            raise ValueError(f"unknown Pauli letter {letter!r}")
        # Y = iXZ, so its image is i·(±P)(±Q) for the images P, Q of X and Z.
        (third,) = set("XYZ") - {letter_x, letter_z}
        sign = sign_x * sign_z
        return (-sign if (letter_x, letter_z) in _CYCLIC else sign), third

    def then(self, other: "Clifford1Q") -> "Clifford1Q":
        """The gate applying self first and other second."""
        images = []
        for letter in "XZ":
            sign, image = self.conjugate(letter)
            second_sign, second_image = other.conjugate(image)
            images.append(f"{'+' if sign * second_sign > 0 else '-'}{second_image}")
        return Clifford1Q(*images)

    def inverse(self) -> "Clifford1Q":
        """The gate undoing self."""
        return next(op for op in all_clifford1q() if self.then(op) == IDENTITY)

    @property
    def name(self) -> str:
        """Conventional name when there is one, the serialized form otherwise."""
        return _NAMES.get(self, self.serialize())

    def is_self_inverse(self) -> bool:
        """Whether applying the gate twice is the identity."""
        return self.then(self) == IDENTITY

    def unitary(self) -> np.ndarray:
        """A 2x2 unitary implementing the gate, with a fixed but arbitrary phase."""
        real, imag, halvings = _gaussian_unitaries()[self]
        return (real + 1j * imag) / np.sqrt(2) ** halvings

    def serialize(self) -> str:
        """Text form used in the circuit format, for example `X:+Z Z:+X`."""
        return f"X:{self.image_x} Z:{self.image_z}"


IDENTITY = Clifford1Q("+X", "+Z")
PAULI_X = Clifford1Q("+X", "-Z")
PAULI_Y = Clifford1Q("-X", "-Z")
PAULI_Z = Clifford1Q("-X", "+Z")
H = Clifford1Q("+Z", "+X")
S = Clifford1Q("+Y", "+Z")
SDG = Clifford1Q("-Y", "+Z")

_NAMES = {IDENTITY: "I", PAULI_X: "X", PAULI_Y: "Y", PAULI_Z: "Z", H: "H", S: "S", SDG: "SDG"}


@lru_cache(maxsize=None)
def all_clifford1q() -> Tuple[Clifford1Q, ...]:
    """The 24 single-qubit Clifford gates in a fixed order."""
    signed = [f"{sign}{letter}" for letter in "XYZ" for sign in "+-"]
    return tuple(
        Clifford1Q(image_x, image_z)
        for image_x in signed
        for image_z in signed
        if image_x[1] != image_z[1]
    )


@lru_cache(maxsize=None)
def _gaussian_unitaries() -> Dict[Clifford1Q, Tuple[np.ndarray, np.ndarray, int]]:
    """Each gate as `(real, imag, k)` with unitary `(real + i imag) / sqrt(2)^k`.

    `real` and `imag` are integer matrices, so products of two of them are exact.
    """
    hadamard = (np.array([[1, 1], [1, -1]], dtype=np.int64), np.zeros((2, 2), dtype=np.int64))
    phase = (np.diag([1, 0]).astype(np.int64), np.diag([0, 1]).astype(np.int64))
    found = {IDENTITY: (np.eye(2, dtype=np.int64), np.zeros((2, 2), dtype=np.int64), 0)}
    queue = deque([IDENTITY])
    while queue:
        op = queue.popleft()
        for generator, matrix, halvings in ((H, hadamard, 1), (S, phase, 0)):
            successor = op.then(generator)
            if successor not in found:
                real, imag, k = found[op]
                found[successor] = (*_gaussian_matmul(matrix, (real, imag)), k + halvings)
                queue.append(successor)
    return found


def _gaussian_matmul(
    left: Tuple[np.ndarray, np.ndarray], right: Tuple[np.ndarray, np.ndarray]
) -> Tuple[np.ndarray, np.ndarray]:
    (a, b), (c, d) = left, right
    return a @ c - b @ d, a @ d + b @ c


class Cnot(namedtuple("Cnot", ["control", "target"])):
    """Controlled-X: Z on the control, X on the target."""

    __slots__ = ()
    kind = "CNOT"

    def __new__(cls, control: int, target: int):
        if control == target:
            raise ValueError(f"{cls.kind} needs two distinct qubits, got {control} twice")
        return super().__new__(cls, int(control), int(target))

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and tuple.__eq__(self, other)

    def __ne__(self, other) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return hash((self.kind, self[0], self[1]))

    @property
    def qubits(self) -> Tuple[int, int]:
        """Qubits the gate acts on."""
        return tuple(self)

    def pauli(self, qubit: int) -> str:
        """The Pauli letter the gate is controlled on, or applies, at `qubit`."""
        return "Z" if qubit == self[0] else "X"

    def relabel(self, perm: Sequence[int]) -> "Cnot":
        """The same gate with qubit q moved to perm[q]."""
        return type(self)(perm[self[0]], perm[self[1]])


class Cz(Cnot):
    """Controlled-Z, symmetric in its two qubits."""

    __slots__ = ()
    kind = "CZ"

    def pauli(self, qubit: int) -> str:
        """Always Z."""
        return "Z"

    @property
    def a(self) -> int:
        """First qubit."""
        return self[0]

    @property
    def b(self) -> int:
        """Second qubit."""
        return self[1]


class Cy(Cnot):
    """Controlled-Y: Z on the control, Y on the target."""

    __slots__ = ()
    kind = "CY"

    def pauli(self, qubit: int) -> str:
        """Z on the control and Y on the target."""
        return "Z" if qubit == self[0] else "Y"


class SingleQubit(namedtuple("SingleQubit", ["qubit", "op"])):
    """A single-qubit Clifford gate `op` on `qubit`."""

    __slots__ = ()
    kind = "SQ"

    @property
    def qubits(self) -> Tuple[int]:
        """Qubits the gate acts on."""
        return (self.qubit,)

    def relabel(self, perm: Sequence[int]) -> "SingleQubit":
        """The same gate with qubit q moved to perm[q]."""
        return SingleQubit(perm[self.qubit], self.op)


Gate = Union[Cnot, Cz, Cy, SingleQubit]
Layer = Tuple[Gate, ...]

LayeredCircuit = namedtuple("LayeredCircuit", "width layers")
LayeredCircuit.__doc__ = """
A circuit on `width` qubits given as a tuple of layers, each a tuple of gates.

The commutative depth is the number of layers; a layer is only meaningful when
`validate_layer` accepts it.
"""


def is_two_qubit(gate: Gate) -> bool:
    """Whether gate is one of the generalized CNOTs."""
    return isinstance(gate, Cnot)


def gates_commute(first: Gate, second: Gate) -> bool:
    """Whether the unitaries of two gates commute exactly.

    Generalized CNOTs commute iff they place the same Pauli on every qubit they share.
    A single-qubit gate commutes with a generalized CNOT iff it fixes the Pauli the CNOT
    places on their shared qubit, and with another single-qubit gate iff their 2x2 matrices
    commute, which is decided over the Gaussian integers without rounding.
    """
    shared = set(first.qubits) & set(second.qubits)
    if not shared:
        return True
    if is_two_qubit(first) and is_two_qubit(second):
        return all(first.pauli(q) == second.pauli(q) for q in shared)
    if is_two_qubit(first):
        first, second = second, first
    if is_two_qubit(second):
        letter = second.pauli(first.qubit)
        return first.op.conjugate(letter) == (1, letter)
    if first.op.then(second.op) != second.op.then(first.op):
        return False
    u, v = (_gaussian_unitaries()[gate.op][:2] for gate in (first, second))
    forward, backward = _gaussian_matmul(u, v), _gaussian_matmul(v, u)
    return all(np.array_equal(x, y) for x, y in zip(forward, backward))


def validate_layer(layer: Iterable[Gate]) -> bool:
    """Whether every pair of gates in the layer commutes.

    Only gates sharing a qubit can fail to commute, so gates are grouped per qubit:
    all generalized CNOTs on a qubit must agree on its Pauli, every single-qubit gate
    there must fix that Pauli, and single-qubit gates on the same qubit must commute.
    """
    letters: Dict[int, set] = {}
    singles: Dict[int, List[SingleQubit]] = {}
    for gate in layer:
        if is_two_qubit(gate):
            for q in gate.qubits:
                letters.setdefault(q, set()).add(gate.pauli(q))
        else:
            singles.setdefault(gate.qubit, []).append(gate)
    if any(len(found) > 1 for found in letters.values()):
        return False
    for q, gates in singles.items():
        for letter in letters.get(q, ()):
            if any(g.op.conjugate(letter) != (1, letter) for g in gates):
                return False
        for i, gate in enumerate(gates):
            if not all(gates_commute(gate, other) for other in gates[i + 1 :]):
                return False
    return True


def depth(circuit: LayeredCircuit) -> int:
    """Commutative depth: the number of layers, single-qubit-only layers included."""
    return len(circuit.layers)


def size(circuit: LayeredCircuit) -> Tuple[int, int]:
    """The pair (two-qubit gate count, total gate count)."""
    gates = [gate for layer in circuit.layers for gate in layer]
    return sum(1 for gate in gates if is_two_qubit(gate)), len(gates)


def standard_depth(circuit: LayeredCircuit) -> int:
    """Ordinary depth, scheduling each gate as soon as its qubits are free."""
    busy = [0] * circuit.width
    for layer in circuit.layers:
        for gate in layer:
            level = max(busy[q] for q in gate.qubits) + 1
            for q in gate.qubits:
                busy[q] = level
    return max(busy, default=0)


def check_circuit(circuit: LayeredCircuit) -> None:
    """Raise ValueError if any gate index lies outside the circuit width."""
    for number, layer in enumerate(circuit.layers):
        for gate in layer:
            if any(not 0 <= q < circuit.width for q in gate.qubits):
                raise ValueError(
                    f"layer {number}: {gate} addresses a qubit outside width {circuit.width}"
                )


def to_linear_matrix(circuit: LayeredCircuit) -> BinMatrix:
    """Matrix M of the linear permutation |x> -> |Mx> computed by a CNOT-only circuit.

    Raises:
        UnsupportedGateError: if the circuit contains anything but CNOT gates.
    """
    bits = np.eye(circuit.width, dtype=np.uint8)
    for layer in circuit.layers:
        for gate in layer:
            if type(gate) is not Cnot:
                raise UnsupportedGateError(f"{gate} is not a CNOT gate")
            bits[gate.target] ^= bits[gate.control]
    return BinMatrix.from_array(bits)


def to_tableau(circuit: LayeredCircuit) -> "CliffordTableau":
    """Tableau of the Clifford operation computed by the circuit."""
    return CliffordTableau.identity(circuit.width).then_gates(
        gate for layer in circuit.layers for gate in layer
    )


def linear_addition_layer(
    matrix: BinMatrix, control_reg: Sequence[int], target_reg: Sequence[int]
) -> Layer:
    """Layer computing |x>|y> -> |x>|y + Mx> across two registers.

    One CNOT per set entry M(i, j), controlled on control_reg[j] and targeting
    target_reg[i], listed in row-major order.

    Raises:
        DimensionError: if M does not have shape (len(target_reg), len(control_reg)).
        ValueError: if the registers overlap.
    """
    if matrix.shape != (len(target_reg), len(control_reg)):
        raise DimensionError(
            f"addition matrix {matrix.shape} does not fit registers of sizes "
            f"{len(target_reg)} and {len(control_reg)}"
        )
    if set(control_reg) & set(target_reg):
        raise ValueError("control and target registers overlap")
    rows, cols = np.nonzero(matrix.to_array())
    return tuple(Cnot(control_reg[j], target_reg[i]) for i, j in zip(rows, cols))


def merge_adjacent_additions(first: Iterable[Gate], second: Iterable[Gate]) -> Layer:
    """Single layer equivalent to two consecutive addition layers.

    Gates present in both layers cancel, so adding A then B yields the layer for A + B.

    Raises:
        LayerMergeError: if either layer holds non-CNOT gates or a qubit is a control in
            one layer and a target in the other.
    """
    first, second = tuple(first), tuple(second)
    if any(type(gate) is not Cnot for gate in first + second):
        raise LayerMergeError("only CNOT addition layers can be merged")
    controls = {gate.control for gate in first + second}
    targets = {gate.target for gate in first + second}
    if controls & targets:
        raise LayerMergeError(
            f"qubits {sorted(controls & targets)} are controls and targets at once"
        )
    return _cancel_pairs(first + second)


def _is_self_inverse(gate: Gate) -> bool:
    return is_two_qubit(gate) or gate.op.is_self_inverse()


def _cancel_pairs(gates: Sequence[Gate]) -> Layer:
    """Drop pairs of identical self-inverse gates from a commuting set, keeping order."""
    counts: Dict[Gate, int] = {}
    for gate in gates:
        counts[gate] = counts.get(gate, 0) + 1
    kept = []
    emitted = set()
    for gate in gates:
        if not _is_self_inverse(gate):
            kept.append(gate)
        elif counts[gate] % 2 and gate not in emitted:
            kept.append(gate)
            emitted.add(gate)
    return tuple(kept)


def relabel_wires(circuit: LayeredCircuit, perm: Sequence[int]) -> LayeredCircuit:
    """Move every gate from qubit q to qubit perm[q]."""
    if sorted(perm) != list(range(circuit.width)):
        raise ValueError(f"{list(perm)} is not a permutation of {circuit.width} wires")
    layers = tuple(tuple(gate.relabel(perm) for gate in layer) for layer in circuit.layers)
    return LayeredCircuit(circuit.width, layers)


def elide_empty_layers(circuit: LayeredCircuit) -> LayeredCircuit:
    """Drop layers without gates."""
    return LayeredCircuit(circuit.width, tuple(layer for layer in circuit.layers if layer))


def compact_layers(circuit: LayeredCircuit) -> LayeredCircuit:
    """Greedy re-layering that never increases the commutative depth.

    Gates are taken in circuit order; each goes to the first layer after the last one
    holding a gate it does not commute with. Every non-commuting pair keeps its order,
    so the computed operation is unchanged.
    """
    layers: List[List[Gate]] = []
    touching: List[Dict[int, List[Gate]]] = []
    for gate in (gate for layer in circuit.layers for gate in layer):
        slot = 0
        for index in reversed(range(len(layers))):
            neighbours = (other for q in gate.qubits for other in touching[index].get(q, ()))
            if not all(gates_commute(gate, other) for other in neighbours):
                slot = index + 1
                break
        if slot == len(layers):
            layers.append([])
            touching.append({})
        layers[slot].append(gate)
        for q in gate.qubits:
            touching[slot].setdefault(q, []).append(gate)
    logger.debug("compacted %d layers into %d", len(circuit.layers), len(layers))
    return LayeredCircuit(circuit.width, tuple(tuple(layer) for layer in layers))


class CircuitBuilder:
    """Incremental construction of a layered circuit over relabelable logical wires.

    Gates are given on logical qubits. Logical qubit i currently lives on physical wire
    `frame[i]`; `permute`, `reverse` and `swap_registers` move data between logical
    names by updating the frame only. Each added layer is packed into the previous one
    when all of their gates still commute pairwise, with repeated self-inverse gates
    cancelling.
    """

    def __init__(self, width: int):
        self._width = width
        self._frame = list(range(width))
        self._layers: List[Layer] = []

    @property
    def width(self) -> int:
        """Number of wires."""
        return self._width

    @property
    def frame(self) -> Tuple[int, ...]:
        """Physical wire of every logical qubit."""
        return tuple(self._frame)

    @property
    def depth(self) -> int:
        """Number of layers so far."""
        return len(self._layers)

    def add_layer(self, gates: Iterable[Gate]) -> None:
        """Append a commuting layer given on logical qubits."""
        layer = tuple(gate.relabel(self._frame) for gate in gates)
        if not layer:
            return
        if self._layers and validate_layer(self._layers[-1] + layer):
            packed = _cancel_pairs(self._layers[-1] + layer)
            logger.debug(
                "packed %d gates into layer %d, %d remain",
                len(layer),
                len(self._layers) - 1,
                len(packed),
            )
            if packed:
                self._layers[-1] = packed
            else:
                self._layers.pop()
            return
        self._layers.append(layer)

    def add_addition(
        self, matrix: BinMatrix, control_reg: Sequence[int], target_reg: Sequence[int]
    ) -> None:
        """Append the addition layer |x>|y> -> |x>|y + Mx> on logical registers."""
        self.add_layer(linear_addition_layer(matrix, control_reg, target_reg))

    def add_single_qubit(self, register: Iterable[int], op: Clifford1Q) -> None:
        """Append `op` on every qubit of a logical register."""
        self.add_layer(SingleQubit(q, op) for q in register if op != IDENTITY)

    def hadamard(self, register: Iterable[int]) -> None:
        """Append a layer of Hadamard gates on a logical register."""
        self.add_single_qubit(register, H)

    def permute(self, perm: Dict[int, int]) -> None:
        """Rename logical qubits: the data held by logical i is now called perm[i].

        Qubits absent from the mapping keep their names.
        """
        if sorted(perm) != sorted(perm.values()):
            raise ValueError(f"{perm} does not permute its own keys")
        frame = list(self._frame)
        for source, destination in perm.items():
            frame[destination] = self._frame[source]
        self._frame = frame
        logger.debug("frame is now %s", self._frame)

    def reverse(self, register: Sequence[int]) -> None:
        """Reverse the order of a logical register without gates."""
        self.permute(dict(zip(register, reversed(register))))

    def swap_registers(self, first: Sequence[int], second: Sequence[int]) -> None:
        """Exchange the contents of two equally sized logical registers without gates."""
        if len(first) != len(second):
            raise ValueError(f"cannot swap registers of sizes {len(first)} and {len(second)}")
        mapping = dict(zip(first, second))
        mapping.update(zip(second, first))
        self.permute(mapping)

    def finish(self) -> LayeredCircuit:
        """The accumulated circuit.

        Raises:
            ValueError: if a relabeling is still pending, since the physical wires
                would then hold permuted data.
        """
        if self._frame != list(range(self._width)):
            raise ValueError(f"wire frame {self._frame} is not the identity")
        return LayeredCircuit(self._width, tuple(self._layers))


def serialize_circuit(circuit: LayeredCircuit) -> str:
    """Text form of a circuit."""
    lines = [FORMAT_HEADER, f"QUBITS {circuit.width}"]
    for layer in circuit.layers:
        lines.append("LAYER")
        for gate in layer:
            if is_two_qubit(gate):
                lines.append(f"{gate.kind} {gate[0]} {gate[1]}")
            else:
                lines.append(f"SQ {gate.qubit} {gate.op.serialize()}")
    return "\n".join(lines) + "\n"


_TWO_QUBIT_KINDS = {gate.kind: gate for gate in (Cnot, Cz, Cy)}


def _parse_gate(tokens: List[str], width: int, number: int) -> Gate:
    kind = tokens[0]
    arity = 4 if kind == "SQ" else 3
    if kind != "SQ" and kind not in _TWO_QUBIT_KINDS:
        raise CircuitParseError(f"unknown gate {kind!r}", number)
    if len(tokens) != arity:
        raise CircuitParseError(f"{kind} takes {arity - 1} arguments", number)
    try:
        qubits = [int(token) for token in tokens[1 : (2 if kind == "SQ" else 3)]]
    except ValueError:
        raise CircuitParseError(f"qubit indices must be integers: {' '.join(tokens)}", number)
    if any(not 0 <= q < width for q in qubits):
        raise CircuitParseError(f"qubit index out of range for width {width}", number)
    try:
        if kind == "SQ":
            return SingleQubit(qubits[0], Clifford1Q.parse(tokens[2], tokens[3]))
        return _TWO_QUBIT_KINDS[kind](*qubits)
    except ValueError as e:
        raise CircuitParseError(str(e), number)


def parse_circuit(text: str) -> LayeredCircuit:
    """Parse the circuit text format.

    Layers are not checked for commutation; use `validate_layer` on the result.

    Raises:
        CircuitParseError: on malformed input, with the offending line number.
    """
    width = None
    layers: List[List[Gate]] = []
    number = 0
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if width is None:
            if tokens[0] != "QUBITS" or len(tokens) != 2 or not tokens[1].isdigit():
                raise CircuitParseError("expected QUBITS <n> before any layer", number)
            width = int(tokens[1])
        elif tokens == ["LAYER"]:
            layers.append([])
        elif not layers:
            raise CircuitParseError("gate found before the first LAYER", number)
        else:
            layers[-1].append(_parse_gate(tokens, width, number))
    if width is None:
        raise CircuitParseError("missing QUBITS line", number)
    return LayeredCircuit(width, tuple(tuple(layer) for layer in layers))


def _popcount_rows(bits: np.ndarray) -> np.ndarray:
    return bits.sum(axis=-1, dtype=np.int64)


class CliffordTableau:
    """Images of the Pauli generators under a Clifford operation.

    Row i < n is the image of X_i and row n + i the image of Z_i, each stored as n x-bits
    followed by n z-bits with a sign bit; x = z = 1 on a qubit stands for Y. Global
    phase is not tracked.
    """

    __slots__ = ("_width", "_table", "_signs")

    def __init__(self, symplectic: BinMatrix, signs: Sequence[int]):
        table = symplectic.to_array()
        signs = np.asarray(signs, dtype=np.uint8).reshape(-1)
        if table.shape[0] != table.shape[1] or table.shape[0] % 2:
            raise DimensionError(f"tableau matrix must be 2n x 2n, got {table.shape}")
        if signs.shape != (table.shape[0],):
            raise DimensionError(f"expected {table.shape[0]} sign bits, got {signs.size}")
        self._width = table.shape[0] // 2
        self._table = table
        self._signs = signs & 1
        self._table.setflags(write=False)
        self._signs.setflags(write=False)

    @classmethod
    def _from_arrays(cls, table: np.ndarray, signs: np.ndarray) -> "CliffordTableau":
        return cls(BinMatrix.from_array(table), signs)

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        """Tableau of the identity on n qubits."""
        return cls._from_arrays(np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))

    @classmethod
    def from_linear(cls, matrix: BinMatrix) -> "CliffordTableau":
        """Tableau of the linear permutation |x> -> |Mx>.

        X_j maps to X on the support of column j of M, and Z_j to Z on the support of
        row j of M⁻¹; all signs are positive.
        """
        n = matrix.rows
        table = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        table[:n, :n] = matrix.to_array().T
        table[n:, n:] = inverse(matrix).to_array()
        return cls._from_arrays(table, np.zeros(2 * n, dtype=np.uint8))

    @property
    def width(self) -> int:
        """Number of qubits."""
        return self._width

    @property
    def symplectic(self) -> BinMatrix:
        """The 2n x 2n binary part."""
        return BinMatrix.from_array(self._table)

    @property
    def signs(self) -> Tuple[int, ...]:
        """The 2n sign bits, 1 meaning a minus sign."""
        return tuple(int(bit) for bit in self._signs)

    def table(self) -> np.ndarray:
        """Writable copy of the binary part."""
        return self._table.copy()

    def is_symplectic(self) -> bool:
        """Whether images of the generators keep the Pauli commutation relations."""
        n = self._width
        x = self._table[:, :n].astype(np.int64)
        z = self._table[:, n:].astype(np.int64)
        form = (x @ z.T + z @ x.T) % 2
        omega = np.zeros((2 * n, 2 * n), dtype=np.int64)
        omega[:n, n:] = np.eye(n, dtype=np.int64)
        omega[n:, :n] = np.eye(n, dtype=np.int64)
        return bool(np.array_equal(form, omega))

    def linear_part(self) -> BinMatrix:
        """Matrix of the X-to-X block as a linear map, meaningful for CNOT circuits."""
        n = self._width
        return BinMatrix.from_array(self._table[:n, :n].T)

    def then_gates(self, gates: Iterable[Gate]) -> "CliffordTableau":
        """Tableau of this operation followed by the given gates, in order."""
        table = self._table.copy()
        signs = self._signs.copy()
        n = self._width
        x, z = table[:, :n], table[:, n:]
        for gate in gates:
            _apply_gate(x, z, signs, gate)
        return CliffordTableau._from_arrays(table, signs)

    def compose(self, other: "CliffordTableau") -> "CliffordTableau":
        """Tableau of self followed by other."""
        if other.width != self._width:
            raise DimensionError(f"cannot compose widths {self._width} and {other.width}")
        n = self._width
        ox, oz = other._table[:, :n], other._table[:, n:]
        # Images in the form i^e X^x Z^z, which multiply with a single dot product.
        images_exp = (2 * other._signs.astype(np.int64) + _popcount_rows(ox & oz)) % 4
        table = np.zeros_like(self._table)
        signs = np.zeros_like(self._signs)
        for row in range(2 * n):
            bits = self._table[row]
            exponent = 2 * int(self._signs[row]) + int(np.sum(bits[:n] & bits[n:]))
            acc_x = np.zeros(n, dtype=np.uint8)
            acc_z = np.zeros(n, dtype=np.uint8)
            for generator in np.flatnonzero(bits):
                exponent += int(images_exp[generator]) + 2 * int(np.sum(acc_z & ox[generator]))
                acc_x ^= ox[generator]
                acc_z ^= oz[generator]
            exponent = (exponent - int(np.sum(acc_x & acc_z))) % 4
            if exponent % 2:
                raise InvalidTableauError("composition produced a non-Hermitian image")
            table[row, :n], table[row, n:] = acc_x, acc_z
            signs[row] = exponent // 2
        return CliffordTableau._from_arrays(table, signs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return (
            self._width == other._width
            and np.array_equal(self._table, other._table)
            and np.array_equal(self._signs, other._signs)
        )

    def __hash__(self) -> int:
        return hash((self._table.tobytes(), self._signs.tobytes()))

    def __repr__(self) -> str:
        return f"CliffordTableau(width={self._width})"


def _apply_gate(x: np.ndarray, z: np.ndarray, signs: np.ndarray, gate: Gate) -> None:
    """Conjugate every row of the tableau arrays by one gate, in place."""
    if type(gate) is Cnot:
        c, t = gate
        signs ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
        x[:, t] ^= x[:, c]
        z[:, c] ^= z[:, t]
    elif type(gate) is Cz:
        a, b = gate
        _apply_gate(x, z, signs, SingleQubit(b, H))
        _apply_gate(x, z, signs, Cnot(a, b))
        _apply_gate(x, z, signs, SingleQubit(b, H))
    elif type(gate) is Cy:
        c, t = gate
        _apply_gate(x, z, signs, SingleQubit(t, SDG))
        _apply_gate(x, z, signs, Cnot(c, t))
        _apply_gate(x, z, signs, SingleQubit(t, S))
    elif type(gate) is SingleQubit:
        q = gate.qubit
        old_x, old_z = x[:, q].copy(), z[:, q].copy()
        for letter, (bit_x, bit_z) in _LETTER_BITS.items():
            rows = (old_x == bit_x) & (old_z == bit_z)
            sign, image = gate.op.conjugate(letter)
            x[rows, q], z[rows, q] = _LETTER_BITS[image]
            if sign < 0:
                signs[rows] ^= 1
    else:
        raise UnsupportedGateError(f"{gate!r} is not in the gate set")


def format_tableau(tableau: CliffordTableau) -> str:
    """Text form of a tableau."""
    bits = tableau.symplectic.to_array()
    lines = [f"QUBITS {tableau.width}"]
    lines.extend("".join(str(int(b)) for b in row) for row in bits)
    lines.append("".join(str(b) for b in tableau.signs))
    return "\n".join(lines) + "\n"


def parse_tableau(text: str) -> CliffordTableau:
    """Parse the tableau text format; `#` lines are comments.

    Raises:
        TableauParseError: on a missing header, wrong row count or foreign characters.
    """
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines or not lines[0].startswith("QUBITS"):
        raise TableauParseError("missing QUBITS header")
    tokens = lines[0].split()
    if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) < 1:
        raise TableauParseError(f"malformed header {lines[0]!r}")
    n = int(tokens[1])
    rows = lines[1:]
    if len(rows) != 2 * n + 1:
        raise TableauParseError(f"expected {2 * n + 1} rows for {n} qubits, got {len(rows)}")
    for index, row in enumerate(rows):
        if len(row) != 2 * n or set(row) - {"0", "1"}:
            raise TableauParseError(f"row {index + 1} must hold {2 * n} binary digits")
    table = BinMatrix.from_rows(rows[:-1])
    return CliffordTableau(table, [int(bit) for bit in rows[-1]])
