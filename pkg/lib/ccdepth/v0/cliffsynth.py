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

"""Commutative-depth-16 circuits for Clifford operations without ancillas.

Every Clifford tableau factors into six layers, applied in this order:

    S1 - Lin - CZ1 - S2 - CZ2 - S3

where the S layers hold one single-qubit Clifford per qubit, Lin is a CNOT circuit
and the CZ layers hold commuting CZ gates. Single-qubit and CZ layers cost one
commutative layer each, and `linsynth.synth_linear` spends at most 11 on Lin:

```python

from ccdepth.v0.circuit import depth, to_tableau
from ccdepth.v0.cliffsynth import decompose_clifford, random_clifford_tableau, recompose
from ccdepth.v0.cliffsynth import synth_clifford

tableau = random_clifford_tableau(8, seed=1)
assert recompose(decompose_clifford(tableau)) == tableau

circuit = synth_clifford(tableau)
assert depth(circuit) <= 16 and to_tableau(circuit) == tableau
```

The decomposition works on the symplectic matrix in column form [[A, B], [C, D]]
(column j is the image of X_j, column n + j the image of Z_j). Hadamards on a set J of
qubits make the block B invertible; then Lin, and the two phase layers with their
CZ and S parts, are read off in closed form. Signs are fixed last by one Pauli
per qubit, absorbed into S3.
"""

import functools
import logging
from collections import namedtuple
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ccdepth.v0.circuit import (
    H,
    IDENTITY,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    S,
    CircuitBuilder,
    Clifford1Q,
    CliffordTableau,
    Cz,
    Gate,
    InvalidTableauError,
    LayeredCircuit,
    SingleQubit,
    check_circuit,
    depth,
    size,
    to_tableau,
    validate_layer,
)
from ccdepth.v0.gf2 import (
    BinMatrix,
    independent_columns,
    inverse,
    nullspace,
    solve,
)
from ccdepth.v0.linsynth import DEFAULT_BUDGET, OddWidthError, synth_linear

# Increment this major API version when introducing breaking changes
LIBAPI = 0

# Increment this PATCH version before releasing, or reset
# to 0 if you are raising the major API version
LIBPATCH = 1

logger = logging.getLogger(__name__)

_PAULIS = {(0, 0): IDENTITY, (1, 0): PAULI_X, (0, 1): PAULI_Z, (1, 1): PAULI_Y}


class RecompositionError(AssertionError):
    """A decomposition or a synthesized circuit does not reproduce its tableau."""


class SixLayerForm(namedtuple("SixLayerForm", ["S1", "Lin", "CZ1", "S2", "CZ2", "S3"])):
    """A Clifford operation as S1, Lin, CZ1, S2, CZ2, S3 in circuit order.

    S1, S2 and S3 hold one `Clifford1Q` per qubit, Lin is an invertible `BinMatrix`
    and CZ1, CZ2 are tuples of sorted qubit pairs.
    """

    __slots__ = ()

    @property
    def width(self) -> int:
        """Number of qubits."""
        return len(self.S1)

    def to_circuit(self, linear_synthesizer: Callable[[BinMatrix], LayeredCircuit]):
        """Layered circuit for the form, with Lin synthesized by `linear_synthesizer`.

        Layers are added through a `CircuitBuilder`, so empty layers vanish and
        adjacent layers that commute are packed together.
        """
        builder = CircuitBuilder(self.width)
        builder.add_layer(_single_qubit_layer(self.S1))
        for layer in linear_synthesizer(self.Lin).layers:
            builder.add_layer(layer)
        builder.add_layer(Cz(a, b) for a, b in self.CZ1)
        builder.add_layer(_single_qubit_layer(self.S2))
        builder.add_layer(Cz(a, b) for a, b in self.CZ2)
        builder.add_layer(_single_qubit_layer(self.S3))
        return builder.finish()


def _single_qubit_layer(ops: Sequence[Clifford1Q]) -> Tuple[Gate, ...]:
    return tuple(SingleQubit(q, op) for q, op in enumerate(ops) if op != IDENTITY)


def _phase_gates(pairs: Iterable[Tuple[int, int]], ops: Sequence[Clifford1Q]) -> List[Gate]:
    return [Cz(a, b) for a, b in pairs] + list(_single_qubit_layer(ops))


def recompose(form: SixLayerForm) -> CliffordTableau:
    """Tableau of the six layers applied in order."""
    tableau = CliffordTableau.identity(form.width).then_gates(_single_qubit_layer(form.S1))
    tableau = tableau.compose(CliffordTableau.from_linear(form.Lin))
    return tableau.then_gates(
        _phase_gates(form.CZ1, form.S2) + _phase_gates(form.CZ2, form.S3)
    )


def _split_phase(gamma: np.ndarray) -> Tuple[Tuple[Tuple[int, int], ...], np.ndarray]:
    """CZ pairs and S mask of the phase layer [[I, 0], [Γ, I]] for symmetric Γ."""
    if not np.array_equal(gamma, gamma.T):
        raise RecompositionError("phase matrix is not symmetric")
    rows, cols = np.nonzero(np.triu(gamma, 1))
    pairs = tuple((int(a), int(b)) for a, b in zip(rows, cols))
    return pairs, np.diagonal(gamma).astype(bool)


def _hadamard_free_form(a: np.ndarray, c: np.ndarray) -> SixLayerForm:
    """Form of [[A, 0], [C, A⁻ᵀ]] = [[I, 0], [CA⁻¹, I]] · [[A, 0], [0, A⁻ᵀ]]."""
    n = a.shape[0]
    lin = BinMatrix.from_array(a)
    gamma = (c.astype(np.int64) @ inverse(lin).to_array()) % 2
    pairs, phases = _split_phase(gamma)
    return SixLayerForm(
        S1=(IDENTITY,) * n,
        Lin=lin,
        CZ1=pairs,
        S2=tuple(S if phase else IDENTITY for phase in phases),
        CZ2=(),
        S3=(IDENTITY,) * n,
    )


def hadamard_qubits(a: np.ndarray, b: np.ndarray) -> List[int]:
    """Qubits J such that swapping columns j of A and B for j in J leaves B invertible.

    The rows y with yᵀB = 0 give rows yᵀA of rank n - rank(B), and their pivot
    columns form J. Isotropy of the rows of [A | B] makes the remaining columns of B
    independent of them.
    """
    left = nullspace(BinMatrix.from_array(b.T))
    if not left.cols:
        return []
    return independent_columns(left.T @ BinMatrix.from_array(a))


def _general_form(a, b, c, d) -> SixLayerForm:
    n = a.shape[0]
    hadamards = hadamard_qubits(a, b)
    a, b, c, d = a.copy(), b.copy(), c.copy(), d.copy()
    a[:, hadamards], b[:, hadamards] = b[:, hadamards], a[:, hadamards]
    c[:, hadamards], d[:, hadamards] = d[:, hadamards], c[:, hadamards]
    logger.debug("Hadamard qubits %s", hadamards)

    b_inv = inverse(BinMatrix.from_array(b)).to_array().astype(np.int64)
    lin = BinMatrix.from_array(b_inv.T)
    gamma1 = (a.astype(np.int64) @ b.T) % 2
    gamma2 = (d.astype(np.int64) @ b_inv) % 2
    pairs1, phases1 = _split_phase(gamma1)
    pairs2, phases2 = _split_phase(gamma2)
    first = set(hadamards)
    return SixLayerForm(
        S1=tuple(H if q in first else IDENTITY for q in range(n)),
        Lin=lin,
        CZ1=pairs1,
        S2=tuple(S.then(H) if phase else H for phase in phases1),
        CZ2=pairs2,
        S3=tuple(S if phase else IDENTITY for phase in phases2),
    )


def _pauli_correction(target: CliffordTableau, unsigned: CliffordTableau) -> List[Clifford1Q]:
    """Per-qubit Paulis P with unsigned followed by P equal to target.

    X_q flips the sign of every image with z_q = 1 and Z_q of every image with
    x_q = 1, so the Pauli X^a Z^b solves [X | Z]·(b; a) = sign difference.
    """
    n = target.width
    flips = np.array(target.signs, dtype=np.uint8) ^ np.array(unsigned.signs, dtype=np.uint8)
    solution = solve(target.symplectic, BinMatrix.from_array(flips.reshape(-1, 1)))
    if solution is None:
        raise RecompositionError("no Pauli correction fixes the signs")
    bits = solution.to_array()[:, 0]
    return [_PAULIS[int(bits[n + q]), int(bits[q])] for q in range(n)]


def decompose_clifford(tableau: CliffordTableau) -> SixLayerForm:
    """Six-layer form of a Clifford tableau, verified by recomposition.

    Args:
        tableau: any valid tableau; signs are reproduced exactly.

    Returns:
        A `SixLayerForm` whose `recompose` equals the tableau. When the images of the
        Z generators carry no X part, no Hadamards are needed and S1, CZ2 stay empty.

    Raises:
        InvalidTableauError: if the tableau does not preserve commutation relations.
        RecompositionError: if the form does not reproduce the tableau.
    """
    if not tableau.is_symplectic():
        raise InvalidTableauError(f"tableau on {tableau.width} qubits is not symplectic")
    n = tableau.width
    columns = tableau.table().T
    a, b = columns[:n, :n], columns[:n, n:]
    c, d = columns[n:, :n], columns[n:, n:]
    form = _hadamard_free_form(a, c) if not b.any() else _general_form(a, b, c, d)

    unsigned = recompose(form)
    if not np.array_equal(unsigned.table(), tableau.table()):
        raise RecompositionError(f"six layers do not reproduce the {n}-qubit tableau")
    correction = _pauli_correction(tableau, unsigned)
    form = form._replace(S3=tuple(op.then(pauli) for op, pauli in zip(form.S3, correction)))
    if recompose(form) != tableau:
        raise RecompositionError(f"sign correction failed on the {n}-qubit tableau")
    return form


def synth_clifford(
    tableau: CliffordTableau,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    linear_synthesizer: Optional[Callable[[BinMatrix], LayeredCircuit]] = None,
) -> LayeredCircuit:
    """Circuit of commutative depth at most 16 for a Clifford on an even number of qubits.

    Args:
        tableau: the operation to synthesize.
        seed: seed of the commutator search inside the linear part.
        budget: bound on commutator search attempts.
        linear_synthesizer: replaces `linsynth.synth_linear` for the CNOT block.

    Raises:
        OddWidthError: if the width is odd.
        InvalidTableauError: if the tableau is not symplectic.
        RecompositionError: if the circuit does not implement the tableau.
    """
    if tableau.width % 2:
        raise OddWidthError(f"width {tableau.width} is odd; pad it to an even width first")
    if linear_synthesizer is None:
        linear_synthesizer = functools.partial(synth_linear, seed=seed, budget=budget)
    circuit = decompose_clifford(tableau).to_circuit(linear_synthesizer)
    check_circuit(circuit)
    if not all(validate_layer(layer) for layer in circuit.layers):
        raise RecompositionError("synthesized circuit holds a non-commuting layer")
    if to_tableau(circuit) != tableau:
        raise RecompositionError("synthesized circuit does not implement its tableau")
    if depth(circuit) > 16:
        raise AssertionError(
            f"Clifford circuit on {tableau.width} qubits has depth {depth(circuit)}"
        )
    logger.info(
        "Clifford on %d qubits: depth %d, size %s", tableau.width, depth(circuit), size(circuit)
    )
    return circuit


def _symplectic_product(u: np.ndarray, v: np.ndarray) -> int:
    n = u.size // 2
    return int(u[:n] @ v[n:] + u[n:] @ v[:n]) % 2


def _project(u: np.ndarray, pairs: List[Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Component of u orthogonal to every chosen pair (v_k, w_k)."""
    out = u.copy()
    for v, w in pairs:
        if _symplectic_product(u, w):
            out ^= v
        if _symplectic_product(u, v):
            out ^= w
    return out


def random_clifford_tableau(n: int, seed: int = 0) -> CliffordTableau:
    """Uniformly random Clifford tableau on n qubits.

    A symplectic basis is drawn pair by pair: the image v of X_j is a uniform non-zero
    vector orthogonal to all earlier pairs, the image w of Z_j a uniform vector of the
    same space with <v, w> = 1. Signs are uniform bits. Every Clifford operation up to
    phase arises from exactly one basis and sign vector, so the draw is uniform.
    Randomness comes from `numpy.random.default_rng(seed)`.
    """
    if n < 1:
        raise ValueError(f"width must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    pairs: List[Tuple[np.ndarray, np.ndarray]] = []
    for _ in range(n):
        v = np.zeros(2 * n, dtype=np.uint8)
        while not v.any():
            v = _project(rng.integers(0, 2, size=2 * n, dtype=np.uint8), pairs)
        while True:
            w = _project(rng.integers(0, 2, size=2 * n, dtype=np.uint8), pairs)
            if _symplectic_product(v, w):
                break
        pairs.append((v, w))
    table = np.array([v for v, _ in pairs] + [w for _, w in pairs], dtype=np.uint8)
    signs = rng.integers(0, 2, size=2 * n, dtype=np.uint8)
    return CliffordTableau(BinMatrix.from_array(table), signs)


def pad_tableau(tableau: CliffordTableau) -> CliffordTableau:
    """The tableau extended by one idle qubit, numbered last."""
    n = tableau.width
    old = tableau.table()
    keep = list(range(n)) + list(range(n + 1, 2 * n + 1))
    table = np.zeros((2 * n + 2, 2 * n + 2), dtype=np.uint8)
    table[np.ix_(keep, keep)] = old
    table[n, n] = table[2 * n + 1, 2 * n + 1] = 1
    signs = np.zeros(2 * n + 2, dtype=np.uint8)
    signs[keep] = tableau.signs
    logger.warning("padded a %d-qubit tableau with an idle qubit", n)
    return CliffordTableau(BinMatrix.from_array(table), signs)
