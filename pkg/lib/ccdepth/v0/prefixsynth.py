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

"""Prefix Sum circuits of constant commutative depth.

Prefix Sum maps |x_1, ..., x_n> to |x_1, x_1+x_2, ..., x_1+...+x_n>, the linear
permutation whose matrix is the lower triangular all-ones matrix (`prefix_matrix`).

Baselines:
- `staircase_circuit(n)`: n-1 layers of one CNOT each.
- `ladner_fischer(n)`: the classic parallel-prefix network for powers of two, with
  2 log2(n) - 1 layers.

The constant-depth construction splits a pruned Ladner-Fischer network on 2^k - 1 wires
into its ascending half L and descending half R, so that P = R·L and R is the
anti-transpose of L. The gadget |x>|y> -> |Mx>|M⁻¹y> costs three addition layers
and a register swap; conjugating it by Hadamards and a register reversal turns one
copy of the gadget into L or R on a single register. Four gadgets give P ⊕ P in
commutative depth 15 (`synth_P_plus_P`), and one more fan-out layer joins the halves:

```python

from ccdepth.v0.circuit import depth, to_tableau, CliffordTableau
from ccdepth.v0.prefixsynth import prefix_matrix, synth_prefix

circuit = synth_prefix(14)
assert depth(circuit) <= 16
assert to_tableau(circuit) == CliffordTableau.from_linear(prefix_matrix(14))
```

Register swaps and reversals are never emitted as gates: the `CircuitBuilder` frame
absorbs them, and the construction returns the frame to the identity.
"""

import logging
from collections import namedtuple
from typing import List, Sequence

from ccdepth.v0.circuit import (
    CircuitBuilder,
    Cnot,
    Layer,
    LayeredCircuit,
    depth,
    linear_addition_layer,
    size,
    standard_depth,
    to_linear_matrix,
)
from ccdepth.v0.gf2 import (
    BinMatrix,
    anti_transpose,
    inverse,
    is_invertible,
    submatrix,
    weight,
)

# Increment this major API version when introducing breaking changes
LIBAPI = 0

# Increment this PATCH version before releasing, or reset
# to 0 if you are raising the major API version
LIBPATCH = 2

logger = logging.getLogger(__name__)

FORWARD = "forward"
REVERSED = "reversed"

LRPair = namedtuple("LRPair", "L_circuit R_circuit L_matrix R_matrix n")
LRPair.__doc__ = """
Ascending (L) and descending (R) halves of a pruned Ladner-Fischer network on n wires.

Running L then R computes Prefix Sum, so R_matrix · L_matrix is the prefix matrix, and
R_matrix is the anti-transpose of L_matrix.
"""

WeightRow = namedtuple("WeightRow", "k n weight_L expected_L weight_Linv expected_Linv")
WeightRow.__doc__ = """One row of the weight table of L and L⁻¹ for n = 2^k - 1."""

PrefixComparison = namedtuple(
    "PrefixComparison", "construction commutative_depth standard_depth two_qubit_size"
)
PrefixComparison.__doc__ = """Cost of one Prefix Sum construction at a given width."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and not n & (n - 1)


def _mersenne_exponent(n: int) -> int:
    """k with n = 2^k - 1, or ValueError."""
    if not _is_power_of_two(n + 1):
        raise ValueError(f"{n} is not of the form 2^k - 1")
    return (n + 1).bit_length() - 1


def prefix_matrix(n: int) -> BinMatrix:
    """Lower triangular all-ones n x n matrix."""
    if n < 1:
        raise ValueError(f"prefix width must be at least 1, got {n}")
    return BinMatrix.from_rows(["1" * (i + 1) + "0" * (n - i - 1) for i in range(n)])


def staircase_circuit(n: int) -> LayeredCircuit:
    """Prefix Sum as n-1 layers, layer i holding CNOT(i, i+1)."""
    if n < 2:
        raise ValueError(f"staircase needs at least 2 qubits, got {n}")
    return LayeredCircuit(n, tuple((Cnot(i, i + 1),) for i in range(n - 1)))


def _ascending_levels(n: int) -> List[Layer]:
    """Binary-tree reduction levels of the Ladner-Fischer network on n = 2^k wires."""
    k = n.bit_length() - 1
    levels = []
    for s in range(1, k + 1):
        half = 1 << (s - 1)
        levels.append(tuple(Cnot(j - half - 1, j - 1) for j in range(1 << s, n + 1, 1 << s)))
    return levels


def _descending_levels(n: int, limit: int) -> List[Layer]:
    """Distribution levels, keeping gates whose target is at most `limit` (1-based)."""
    k = n.bit_length() - 1
    levels = []
    for s in range(k - 1, 0, -1):
        half = 1 << (s - 1)
        levels.append(
            tuple(
                Cnot(j - 1, j + half - 1)
                for j in range(1 << s, n + 1, 1 << s)
                if j + half <= limit
            )
        )
    return levels


def ladner_fischer(n: int) -> LayeredCircuit:
    """Ladner-Fischer Prefix Sum network on n = 2^k wires, one layer per tree level."""
    if n < 2 or not _is_power_of_two(n):
        raise ValueError(f"Ladner-Fischer needs a power of two of at least 2, got {n}")
    levels = _ascending_levels(n) + _descending_levels(n, n)
    return LayeredCircuit(n, tuple(level for level in levels if level))


def pruned_lf(n: int) -> LRPair:
    """L and R halves of the Ladner-Fischer network on 2^k wires with the last one removed."""
    k = _mersenne_exponent(n)
    full = 1 << k
    ascending = [
        tuple(gate for gate in level if gate.target != full - 1)
        for level in _ascending_levels(full)
    ]
    l_circuit = LayeredCircuit(n, tuple(level for level in ascending if level))
    r_circuit = LayeredCircuit(n, tuple(level for level in _descending_levels(full, n) if level))
    l_matrix, r_matrix = to_linear_matrix(l_circuit), to_linear_matrix(r_circuit)
    return LRPair(l_circuit, r_circuit, l_matrix, r_matrix, n)


def _prune_circuit(circuit: LayeredCircuit, t: int) -> LayeredCircuit:
    keep = range(t, circuit.width - t)
    layers = []
    for layer in circuit.layers:
        kept = tuple(
            Cnot(gate.control - t, gate.target - t)
            for gate in layer
            if gate.control in keep and gate.target in keep
        )
        if kept:
            layers.append(kept)
    return LayeredCircuit(circuit.width - 2 * t, tuple(layers))


def symmetric_prune(pair: LRPair, t: int) -> LRPair:
    """Drop t wires from each end of an L/R pair.

    Wires at the top only ever hold sums of wires above them and wires at the bottom
    never feed wires above them, so the pruned pair still computes Prefix Sum.
    """
    if t < 0 or 2 * t >= pair.n:
        raise ValueError(f"cannot prune {t} wires from each end of {pair.n}")
    if not t:
        return pair
    keep = range(t, pair.n - t)
    return LRPair(
        _prune_circuit(pair.L_circuit, t),
        _prune_circuit(pair.R_circuit, t),
        submatrix(pair.L_matrix, keep, keep),
        submatrix(pair.R_matrix, keep, keep),
        pair.n - 2 * t,
    )


def lr_pair(n: int) -> LRPair:
    """L/R pair for any odd n, pruned symmetrically from the next 2^k - 1."""
    if n < 1 or not n % 2:
        raise ValueError(f"L/R pairs exist for odd widths only, got {n}")
    full = (1 << n.bit_length()) - 1 if not _is_power_of_two(n + 1) else n
    return symmetric_prune(pruned_lf(full), (full - n) // 2)


def build_L_matrix(n: int) -> BinMatrix:  # noqa: N802
    """L_n from the block recursion L_{2m+1} = [[L_m, 0, 0], [1...1, 1, 0], [0, 0, L_m]]."""
    k = _mersenne_exponent(n)
    matrix = BinMatrix.identity(1)
    for _ in range(1, k):
        m = matrix.rows
        bits = BinMatrix.zeros(2 * m + 1, 2 * m + 1).to_array()
        inner = matrix.to_array()
        bits[:m, :m] = inner
        bits[m, : m + 1] = 1
        bits[m + 1 :, m + 1 :] = inner
        matrix = BinMatrix.from_array(bits)
    return matrix


def build_R_matrix(n: int) -> BinMatrix:  # noqa: N802
    """R_n, the anti-transpose of L_n."""
    return anti_transpose(build_L_matrix(n))


def build_Linv_matrix(n: int) -> BinMatrix:  # noqa: N802
    """L_n⁻¹ from its block recursion, without inverting anything.

    The middle row of L⁻¹_{2m+1} has a one at column c (1-based, c <= m) exactly when
    m + 1 - c is a power of two, besides its diagonal entry.
    """
    k = _mersenne_exponent(n)
    matrix = BinMatrix.identity(1)
    for _ in range(1, k):
        m = matrix.rows
        bits = BinMatrix.zeros(2 * m + 1, 2 * m + 1).to_array()
        inner = matrix.to_array()
        bits[:m, :m] = inner
        for c in range(1, m + 1):
            bits[m, c - 1] = int(_is_power_of_two(m + 1 - c))
        bits[m, m] = 1
        bits[m + 1 :, m + 1 :] = inner
        matrix = BinMatrix.from_array(bits)
    return matrix


def weight_recurrences(kmax: int) -> List[WeightRow]:
    """Check the weights of L_n and L_n⁻¹ against their recurrences for k = 1..kmax.

    weight(L_1) = 1 and weight(L_{2m+1}) = 2 weight(L_m) + m + 1; weight(L_1⁻¹) = 1 and
    weight(L⁻¹_{2m+1}) = 2 weight(L⁻¹_m) + 1 + floor(log2 m) + 1.

    Raises:
        AssertionError: naming the first k whose matrices disagree with a recurrence.
    """
    if kmax < 1:
        raise ValueError(f"kmax must be at least 1, got {kmax}")
    rows = []
    expected_l = expected_linv = 1
    for k in range(1, kmax + 1):
        n = (1 << k) - 1
        if k > 1:
            m = (n - 1) // 2
            expected_l = 2 * expected_l + m + 1
            expected_linv = 2 * expected_linv + 1 + (m.bit_length() - 1) + 1
        row = WeightRow(
            k,
            n,
            weight(build_L_matrix(n)),
            expected_l,
            weight(build_Linv_matrix(n)),
            expected_linv,
        )
        if row.weight_L != row.expected_L or row.weight_Linv != row.expected_Linv:
            raise AssertionError(f"weight recurrence fails at k={k}: {row}")
        logger.debug("weights at k=%d: %s", k, row)
        rows.append(row)
    return rows


def _registers(m: int):
    return list(range(m)), list(range(m, 2 * m))


def gadget_M_Minv(  # noqa: N802
    matrix: BinMatrix,
    orientation: str = FORWARD,
    registers: Sequence[Sequence[int]] = None,
) -> List[Layer]:
    """Three addition layers computing M ⊕ M⁻¹ up to a trailing register swap.

    Forward: add M·x0 into x1, M⁻¹·x1 into x0, M·x0 into x1; after swapping the
    registers this is M ⊕ M⁻¹. Reversed mirrors the registers, adding M upwards,
    M⁻¹ downwards and M upwards, which after the swap is M⁻¹ ⊕ M.

    Raises:
        SingularMatrixError: if M is not invertible.
        ValueError: on an unknown orientation.
    """
    top, bottom = registers if registers is not None else _registers(matrix.rows)
    matrix_inv = inverse(matrix)
    if orientation == FORWARD:
        steps = [(matrix, top, bottom), (matrix_inv, bottom, top), (matrix, top, bottom)]
    elif orientation == REVERSED:
        steps = [(matrix, bottom, top), (matrix_inv, top, bottom), (matrix, bottom, top)]
    else:
        raise ValueError(f"orientation must be {FORWARD} or {REVERSED}, got {orientation!r}")
    return [linear_addition_layer(block, controls, targets) for block, controls, targets in steps]


def _add_gadget(builder: CircuitBuilder, matrix: BinMatrix, orientation: str, top, bottom):
    for layer in gadget_M_Minv(matrix, orientation, (top, bottom)):
        builder.add_layer(layer)
    builder.swap_registers(top, bottom)


def _add_p_plus_p(builder: CircuitBuilder, pair: LRPair, top: List[int], bottom: List[int]):
    """Append P ⊕ P on two registers of one builder.

    The first half computes I ⊕ P: a forward gadget for R, conjugated on the bottom
    register by Hadamards and a reversal, yields R ⊕ L, and a reversed gadget for R then
    leaves I ⊕ R·L. The second half mirrors it with L to compute P ⊕ I. Hadamards
    turn M into M^-T and the reversal turns that into the anti-transpose.
    """
    builder.hadamard(bottom)
    builder.reverse(bottom)
    _add_gadget(builder, pair.R_matrix, FORWARD, top, bottom)
    builder.reverse(bottom)
    builder.hadamard(bottom)
    _add_gadget(builder, pair.R_matrix, REVERSED, top, bottom)

    _add_gadget(builder, pair.L_matrix, FORWARD, top, bottom)
    builder.hadamard(top)
    builder.reverse(top)
    _add_gadget(builder, pair.L_matrix, REVERSED, top, bottom)
    builder.reverse(top)
    builder.hadamard(top)


def synth_P_plus_P(n: int) -> LayeredCircuit:  # noqa: N802
    """Circuit on 2n wires computing Prefix Sum on each half, in commutative depth 15.

    Accepts every odd n >= 3; widths other than 2^k - 1 use a symmetrically pruned pair.
    """
    if n < 3 or not n % 2:
        raise ValueError(f"P ⊕ P needs an odd register width of at least 3, got {n}")
    builder = CircuitBuilder(2 * n)
    top, bottom = _registers(n)
    _add_p_plus_p(builder, lr_pair(n), top, bottom)
    circuit = builder.finish()
    if depth(circuit) > 15:
        raise AssertionError(f"P ⊕ P on {n} wires came out at depth {depth(circuit)}")
    logger.info("P+P on 2x%d wires: depth %d, size %s", n, depth(circuit), size(circuit))
    return circuit


def synth_prefix(n: int) -> LayeredCircuit:
    """Prefix Sum on n wires, in commutative depth 16 for even n and 17 for odd n.

    - n <= 4: the staircase.
    - n = 2m with m odd: P ⊕ P on the halves and one fan-out layer adding the total of
      the first half into every wire of the second half.
    - n = 4j: P ⊕ P on wires 1..n-2. Wire 0 is added into wire 1 alongside the first
      Hadamard layer, the last wire of the second half is added into wire n-1 alongside
      the last Hadamard layer, and the fan-out also reaches wire n-1.
    - odd n: the construction for n-1, then CNOT(n-2, n-1).
    """
    if n < 2:
        raise ValueError(f"Prefix Sum needs at least 2 qubits, got {n}")
    if n <= 4:
        circuit = staircase_circuit(n)
    elif n % 2:
        even = synth_prefix(n - 1)
        circuit = LayeredCircuit(n, even.layers + ((Cnot(n - 2, n - 1),),))
    elif n % 4 == 2:
        m = n // 2
        builder = CircuitBuilder(n)
        top, bottom = _registers(m)
        _add_p_plus_p(builder, lr_pair(m), top, bottom)
        builder.add_layer(Cnot(m - 1, q) for q in bottom)
        circuit = builder.finish()
    else:
        m = (n - 2) // 2
        builder = CircuitBuilder(n)
        top, bottom = list(range(1, m + 1)), list(range(m + 1, 2 * m + 1))
        builder.add_layer([Cnot(0, 1)])
        _add_p_plus_p(builder, lr_pair(m), top, bottom)
        builder.add_layer([Cnot(2 * m, n - 1)])
        builder.add_layer([Cnot(m, q) for q in bottom] + [Cnot(m, n - 1)])
        circuit = builder.finish()
    bound = 17 if n % 2 else 16
    if depth(circuit) > bound:
        raise AssertionError(f"Prefix Sum on {n} wires came out at depth {depth(circuit)}")
    logger.info("prefix on %d wires: depth %d, size %s", n, depth(circuit), size(circuit))
    return circuit


def compare_prefix_constructions(n: int) -> List[PrefixComparison]:
    """Costs of the staircase, Ladner-Fischer (for powers of two) and constant-depth circuits."""
    candidates = [("staircase", staircase_circuit(n))]
    if _is_power_of_two(n):
        candidates.append(("ladner-fischer", ladner_fischer(n)))
    candidates.append(("commutative", synth_prefix(n)))
    return [
        PrefixComparison(name, depth(circuit), standard_depth(circuit), size(circuit)[0])
        for name, circuit in candidates
    ]


def is_lr_pair(pair: LRPair) -> bool:
    """Whether a pair satisfies R·L = P and R = anti-transpose(L)."""
    return (
        is_invertible(pair.L_matrix)
        and pair.R_matrix == anti_transpose(pair.L_matrix)
        and pair.R_matrix @ pair.L_matrix == prefix_matrix(pair.n)
    )
