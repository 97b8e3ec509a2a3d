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

"""Commutative-depth-11 circuits for invertible linear maps on 2m qubits.

Any invertible M on two m-qubit registers factors, once its top-left block A is
invertible, as

    M = [[I, 0], [CA⁻¹, I]] · (A ⊕ S) · [[I, A⁻¹B], [0, I]],    S = D + CA⁻¹B

and A ⊕ S splits further through a group commutator W = A·S = P·Q·P⁻¹·Q⁻¹:

    A ⊕ S = (A ⊕ A⁻¹)(P⁻¹ ⊕ P)(PQ⁻¹ ⊕ QP⁻¹)(Q ⊕ Q⁻¹)

Every N ⊕ N⁻¹ factor is a three-layer gadget, and consecutive additions in the same
direction merge, which leaves ten addition layers (`synth_linear_depth10`). One more
addition layer makes A invertible for arbitrary M (`synth_linear`).

```python

from ccdepth.v0.circuit import depth, to_linear_matrix
from ccdepth.v0.gf2 import random_invertible
from ccdepth.v0.linsynth import synth_linear

matrix = random_invertible(20, seed=3)
circuit = synth_linear(matrix, seed=0)
assert depth(circuit) <= 11 and to_linear_matrix(circuit) == matrix
```

The commutator is found constructively. First, a basis is searched level by level in
which W = L·U with L and U unitriangular and each a single Jordan block; then Q = U⁻¹
and P is any matrix conjugating U⁻¹ to L. When no such basis is found, W is split
along its rational canonical form and each piece is handled on its own, searching for
Q with W·Q conjugate to Q. All searches are seeded and bounded by a budget.
"""

import copy
import itertools
import logging
from collections import namedtuple
from typing import Iterator, List, Optional, Tuple

import numpy as np

from ccdepth.v0.circuit import (
    CircuitBuilder,
    Cnot,
    Layer,
    LayeredCircuit,
    compact_layers,
    depth,
    linear_addition_layer,
    size,
    to_linear_matrix,
)
from ccdepth.v0.gf2 import (
    GF2X,
    BinMatrix,
    SingularMatrixError,
    block,
    companion_matrix,
    conjugator,
    direct_sum,
    frobenius_form,
    identity,
    independent_columns,
    inverse,
    invariant_factors,
    is_invertible,
    mul,
    nullspace,
    random_invertible,
    rank,
    solve,
    submatrix,
    zeros,
)
from ccdepth.v0.prefixsynth import FORWARD, REVERSED, gadget_M_Minv

# Increment this major API version when introducing breaking changes
LIBAPI = 0

# Increment this PATCH version before releasing, or reset
# to 0 if you are raising the major API version
LIBPATCH = 6

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10000
MIN_WIDTH = 6


class UnsupportedDimensionError(ValueError):
    """Raised when a matrix is too small for the commutator construction."""


class CommutatorSearchError(ValueError):
    """Raised when the bounded commutator search finds no factorization."""


class OddWidthError(ValueError):
    """Raised when a construction needs two equal registers but the width is odd."""


class ReassemblyError(AssertionError):
    """Raised when factors or circuits fail to multiply back to their target."""


SchurDecomposition = namedtuple("SchurDecomposition", "A B C D S CAinv AinvB")
SchurDecomposition.__doc__ = """
Blocks of M = [[A, B], [C, D]] with A invertible, the Schur complement S = D + CA⁻¹B and
the off-diagonal factors CA⁻¹ and A⁻¹B.
"""

CommutatorPair = namedtuple("CommutatorPair", "P Q")
CommutatorPair.__doc__ = """Invertible P and Q with P·Q·P⁻¹·Q⁻¹ equal to a target."""


class _Budget:
    """Counter shared by every stage of one commutator search."""

    def __init__(self, limit: int, parent: Optional["_Budget"] = None):
        self.limit = limit
        self.spent = 0
        self.parent = parent

    def spend(self) -> bool:
        self.spent += 1
        within = self.spent <= self.limit
        if self.parent is not None:
            within = self.parent.spend() and within
        return within

    def share(self, limit: int) -> "_Budget":
        """A budget capped at limit whose steps are also charged here."""
        return _Budget(limit, parent=self)


def _registers(n: int, m: int) -> Tuple[List[int], List[int]]:
    return list(range(m)), list(range(m, n))


def _addition_matrix(x: BinMatrix) -> BinMatrix:
    """[[I, 0], [X, I]] for an (n-m) x m block X."""
    n_bottom, m = x.shape
    return block([[identity(m), zeros(m, n_bottom)], [x, identity(n_bottom)]])


def make_upper_block_invertible(matrix: BinMatrix, m: int) -> Tuple[BinMatrix, Layer]:
    """X making the top-left block of M·[[I, 0], [X, I]] invertible, with its layer.

    Non-pivot columns j of the top-left block A' are paired with columns b of the
    top-right block B' that complete the pivot columns of A' to a basis; X(b, j) = 1
    adds column b into column j. The layer adds X·x0 into x1, so running it before a
    circuit for M·[[I, 0], [X, I]] computes M.

    Raises:
        SingularMatrixError: if M is singular.
        ValueError: if m is not strictly between 0 and the width.
    """
    n = matrix.rows
    if not 0 < m < n:
        raise ValueError(f"block size {m} must lie strictly between 0 and {n}")
    if not is_invertible(matrix):
        raise SingularMatrixError(f"matrix of width {n} is singular")
    top, bottom = _registers(n, m)
    a_block = submatrix(matrix, top, top)
    b_block = submatrix(matrix, top, bottom)
    x = zeros(n - m, m).to_array()
    pivots = independent_columns(a_block)
    if len(pivots) < m:
        stacked = block([[submatrix(a_block, top, pivots), b_block]])
        completion = [col - len(pivots) for col in independent_columns(stacked)[len(pivots) :]]
        free = [col for col in top if col not in pivots]
        for b_col, a_col in zip(completion, free):
            x[b_col, a_col] = 1
        logger.debug("top-left block had rank %d, added %d columns", len(pivots), len(free))
    x = BinMatrix.from_array(x)
    return x, linear_addition_layer(x, top, bottom)


def schur(matrix: BinMatrix, m: int) -> SchurDecomposition:
    """Block factorization M = [[I, 0], [CA⁻¹, I]] (A ⊕ S) [[I, A⁻¹B], [0, I]].

    Raises:
        SingularMatrixError: if the top-left m x m block is singular.
    """
    top, bottom = _registers(matrix.rows, m)
    a_block = submatrix(matrix, top, top)
    b_block = submatrix(matrix, top, bottom)
    c_block = submatrix(matrix, bottom, top)
    d_block = submatrix(matrix, bottom, bottom)
    try:
        a_inv = inverse(a_block)
    except SingularMatrixError as e:
        raise SingularMatrixError(
            "top-left block is singular, apply make_upper_block_invertible first"
        ) from e
    c_a_inv = mul(c_block, a_inv)
    a_inv_b = mul(a_inv, b_block)
    complement = d_block + mul(c_block, a_inv_b)
    return SchurDecomposition(a_block, b_block, c_block, d_block, complement, c_a_inv, a_inv_b)


def reassemble_schur(decomposition: SchurDecomposition) -> BinMatrix:
    """Product of the three Schur factors."""
    m, k = decomposition.A.rows, decomposition.D.rows
    lower = block([[identity(m), zeros(m, k)], [decomposition.CAinv, identity(k)]])
    upper = block([[identity(m), decomposition.AinvB], [zeros(k, m), identity(k)]])
    return lower @ direct_sum(decomposition.A, decomposition.S) @ upper


def is_commutator(pair: CommutatorPair, target: BinMatrix) -> bool:
    """Whether P·Q·P⁻¹·Q⁻¹ equals the target."""
    p, q = pair
    return p @ q @ inverse(p) @ inverse(q) == target


def _mod2(a: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) % 2).astype(np.uint8)


def _dot(u: np.ndarray, v: np.ndarray) -> int:
    return int(np.sum(u & v) % 2)


def _adapted_basis(s: np.ndarray, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """S with first column s whose inverse has first row lam, given lam·s = 1.

    The remaining columns e_j + lam_j e_p (j != p, lam_p = 1) span the kernel of lam.
    """
    k = s.size
    p = int(np.flatnonzero(lam)[0])
    others = [j for j in range(k) if j != p]
    basis = np.zeros((k, k), dtype=np.uint8)
    basis_inv = np.zeros((k, k), dtype=np.uint8)
    basis[:, 0] = s
    basis_inv[0] = lam
    for column, j in enumerate(others, start=1):
        basis[j, column] = 1
        basis[p, column] ^= lam[j]
        basis_inv[column] = lam * s[j]
        basis_inv[column, j] ^= 1
    return basis, basis_inv


def _vectors(k: int) -> Iterator[np.ndarray]:
    for bits in itertools.product((0, 1), repeat=k):
        yield np.array(bits, dtype=np.uint8)


def _pivot_candidates(
    a: np.ndarray, c_prev, r_prev, rng: np.random.Generator
) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Pairs (s, lam) with lam·s = lam·(a s) = 1, r_prev·s = 1 and lam·c_prev = 1.

    Small levels are enumerated exhaustively; larger ones are sampled.
    """
    k = a.shape[0]
    if k <= 3:
        for s in _vectors(k):
            if not s.any() or (r_prev is not None and not _dot(r_prev, s)):
                continue
            a_s = _mod2(a.astype(np.int64) @ s)
            for lam in _vectors(k):
                if _dot(lam, s) and _dot(lam, a_s) and (c_prev is None or _dot(lam, c_prev)):
                    yield s, lam
        return
    if r_prev is not None and not r_prev.any():
        return
    for _ in range(3):
        s = rng.integers(0, 2, size=k, dtype=np.uint8)
        if r_prev is not None and not _dot(r_prev, s):
            s[np.flatnonzero(r_prev)[0]] ^= 1
        if not s.any():
            continue
        a_s = _mod2(a.astype(np.int64) @ s)
        rows = [s, a_s] + ([c_prev] if c_prev is not None else [])
        system = BinMatrix.from_array(np.array(rows, dtype=np.uint8))
        particular = solve(system, BinMatrix.from_array(np.ones((len(rows), 1), dtype=np.uint8)))
        if particular is None:
            continue
        kernel = nullspace(system).to_array()
        mix = rng.integers(0, 2, size=kernel.shape[1], dtype=np.int64)
        lam = _mod2(particular.to_array()[:, 0] + kernel.astype(np.int64) @ mix)
        yield s, lam


def _unipotent_levels(a, c_prev, r_prev, rng, budget: _Budget) -> Optional[List[np.ndarray]]:
    """Basis changes, one per level, bringing `a` to a regular unipotent L·U form."""
    k = a.shape[0]
    for s, lam in _pivot_candidates(a, c_prev, r_prev, rng):
        if not budget.spend():
            return None
        basis, basis_inv = _adapted_basis(s, lam)
        adapted = _mod2(basis_inv.astype(np.int64) @ a @ basis)
        if k == 1:
            return [basis]
        column, row = adapted[1:, 0], adapted[0, 1:]
        trailing = adapted[1:, 1:] ^ np.outer(column, row).astype(np.uint8)
        rest = _unipotent_levels(trailing, column, row, rng, budget)
        if rest is not None:
            return [basis] + rest
    return None


def _unit_lu(a: np.ndarray) -> Optional[Tuple[BinMatrix, BinMatrix]]:
    """a = L·U with L unit lower and U unit upper triangular, if pivots allow."""
    m = a.shape[0]
    upper = a.copy()
    lower = np.eye(m, dtype=np.uint8)
    for i in range(m):
        if not upper[i, i]:
            return None
        rows = np.flatnonzero(upper[i + 1 :, i]) + i + 1
        lower[rows, i] = 1
        upper[rows] ^= upper[i]
    return BinMatrix.from_array(lower), BinMatrix.from_array(upper)


def _is_regular_unipotent(a: BinMatrix) -> bool:
    return rank(a + identity(a.rows)) == a.rows - 1


def _unipotent_commutator(
    w: BinMatrix, rng: np.random.Generator, budget: _Budget
) -> Optional[CommutatorPair]:
    """Commutator through a basis where W = L·U with L, U single Jordan blocks.

    Q = U⁻¹ and P conjugating U⁻¹ to L give P·Q·P⁻¹·Q⁻¹ = L·U.
    """
    m = w.rows
    # Widths up to 3 are searched exhaustively in one pass.
    restarts = itertools.count() if m > 3 else range(1)
    for _ in restarts:
        if not budget.spend():
            return None
        levels = _unipotent_levels(w.to_array(), None, None, rng, budget)
        if levels is None:
            continue
        transform = np.eye(m, dtype=np.int64)
        for offset, basis in enumerate(levels):
            lifted = np.eye(m, dtype=np.int64)
            lifted[offset:, offset:] = basis
            transform = (transform @ lifted) % 2
        t = BinMatrix.from_array(transform)
        t_inv = inverse(t)
        factors = _unit_lu((t_inv @ w @ t).to_array())
        if factors is None:
            continue
        lower, upper = factors
        if not (_is_regular_unipotent(lower) and _is_regular_unipotent(upper)):
            continue
        q = inverse(upper)
        p = conjugator(q, lower)
        if p is None:
            continue
        return CommutatorPair(t @ p @ t_inv, t @ q @ t_inv)
    return None


def _irreducible_companions(d: int) -> Iterator[BinMatrix]:
    poly = GF2X(1 << d)
    while True:
        poly = GF2X.next_irreducible(poly)
        if poly.degree() != d:
            return
        yield companion_matrix(poly)


def _general_linear_3() -> Iterator[BinMatrix]:
    for bits in itertools.product((0, 1), repeat=9):
        candidate = BinMatrix.from_array(np.array(bits, dtype=np.uint8).reshape(3, 3))
        if is_invertible(candidate):
            yield candidate


def _conjugate_search(
    w: BinMatrix, rng: np.random.Generator, budget: _Budget
) -> Optional[CommutatorPair]:
    """Look for Q with W·Q conjugate to Q; then P·Q·P⁻¹ = W·Q."""
    d = w.rows
    if d == 3:
        candidates = itertools.chain(_irreducible_companions(d), _general_linear_3())
    else:
        randoms = (random_invertible(d, rng=rng) for _ in itertools.count())
        candidates = itertools.chain(_irreducible_companions(d), randoms)
    for q in candidates:
        if not budget.spend():
            return None
        p = conjugator(q, w @ q)
        if p is not None:
            return CommutatorPair(p, q)
    return None


def _chunks(sizes: List[int]) -> List[Tuple[int, int]]:
    """Group consecutive block sizes into (offset, size) chunks of size at least 3."""
    chunks = []
    start = current = 0
    for d in sizes:
        current += d
        if current - start >= 3:
            chunks.append((start, current - start))
            start = current
    if current > start:
        offset, width = chunks.pop()
        chunks.append((offset, width + current - start))
    return chunks


def _blockwise_commutator(
    w: BinMatrix, rng: np.random.Generator, budget: _Budget
) -> Optional[CommutatorPair]:
    """Commutators of the rational canonical form, one chunk of blocks at a time."""
    form, transform = frobenius_form(w)
    sizes = [poly.degree() for poly in invariant_factors(w)]
    p_parts, q_parts = [], []
    for offset, width in _chunks(sizes):
        span = range(offset, offset + width)
        piece = submatrix(form, span, span)
        if piece.is_identity():
            pair = CommutatorPair(identity(width), identity(width))
        else:
            pair = _unipotent_commutator(piece, rng, budget.share(budget.limit // 4 or 1))
            if pair is None:
                logger.debug("searching conjugates for a chunk of width %d", width)
                pair = _conjugate_search(piece, rng, budget)
        if pair is None:
            return None
        p_parts.append(pair.P)
        q_parts.append(pair.Q)
    transform_inv = inverse(transform)
    p = transform_inv @ direct_sum(*p_parts) @ transform
    q = transform_inv @ direct_sum(*q_parts) @ transform
    return CommutatorPair(p, q)


def commutator_decompose(
    w: BinMatrix, seed: int = 0, budget: int = DEFAULT_BUDGET
) -> CommutatorPair:
    """P and Q with P·Q·P⁻¹·Q⁻¹ == W for invertible W of size at least 3.

    Args:
        w: target matrix.
        seed: seed of the random choices; equal seeds give equal answers.
        budget: bound on search steps (basis levels tried plus candidates tested) of each
            of the two strategies. Every chunk of the blockwise strategy draws on one budget.

    Raises:
        UnsupportedDimensionError: if W is smaller than 3 x 3.
        SingularMatrixError: if W is singular.
        CommutatorSearchError: if the budget runs out first.
    """
    if w.rows < 3 or not w.is_square():
        raise UnsupportedDimensionError(
            f"commutators need a square size of 3 or more, got {w.shape}"
        )
    if not is_invertible(w):
        raise SingularMatrixError("commutator target is singular")
    if w.is_identity():
        return CommutatorPair(w, w)
    rng = np.random.default_rng(seed)
    pair = _unipotent_commutator(w, rng, _Budget(budget))
    if pair is None:
        logger.warning("no unipotent factorization of a width %d target, splitting it", w.rows)
        pair = _blockwise_commutator(w, rng, _Budget(budget))
    if pair is None:
        raise CommutatorSearchError(
            f"no commutator found for width {w.rows} within {budget} steps"
        )
    if not is_commutator(pair, w):
        raise ReassemblyError("commutator pair does not multiply back to its target")
    logger.info("commutator found for width %d", w.rows)
    return pair


def _factors(decomposition: SchurDecomposition, pair: CommutatorPair) -> List[BinMatrix]:
    p, q = pair
    p_inv, q_inv = inverse(p), inverse(q)
    a = decomposition.A
    m, k = a.rows, decomposition.D.rows
    return [
        block([[identity(m), decomposition.AinvB], [zeros(k, m), identity(k)]]),
        direct_sum(q, q_inv),
        direct_sum(p @ q_inv, q @ p_inv),
        direct_sum(p_inv, p),
        direct_sum(a, inverse(a)),
        block([[identity(m), zeros(m, k)], [decomposition.CAinv, identity(k)]]),
    ]


def decomposition_factors(
    matrix: BinMatrix, seed: int = 0, budget: int = DEFAULT_BUDGET
) -> List[BinMatrix]:
    """The six factors of M in time order: the last one applied is the last listed.

    [[I, A⁻¹B], [0, I]], Q ⊕ Q⁻¹, PQ⁻¹ ⊕ QP⁻¹, P⁻¹ ⊕ P, A ⊕ A⁻¹, [[I, 0], [CA⁻¹, I]].
    """
    decomposition = schur(matrix, _half(matrix))
    pair = commutator_decompose(decomposition.A @ decomposition.S, seed, budget)
    return _reassembled(_factors(decomposition, pair), matrix)


def _reassembled(factors: List[BinMatrix], target: BinMatrix) -> List[BinMatrix]:
    product = identity(target.rows)
    for factor in factors:
        product = factor @ product
    if product != target:
        raise ReassemblyError("decomposition factors do not multiply back to the matrix")
    return factors


def _half(matrix: BinMatrix) -> int:
    if not matrix.is_square():
        raise ValueError(f"expected a square matrix, got {matrix.shape}")
    if matrix.rows % 2:
        raise OddWidthError(f"width {matrix.rows} is odd; pad it to an even width first")
    return matrix.rows // 2


def _with_inverse_pair(builder: CircuitBuilder, matrix: BinMatrix, top, bottom) -> CircuitBuilder:
    """Builder extended by N ⊕ N⁻¹ in whichever gadget orientation packs better.

    The forward gadget of N starts by adding downwards, the reversed gadget of N⁻¹ by
    adding upwards; both compute N ⊕ N⁻¹ after the register swap.
    """
    options = []
    for block_matrix, orientation in ((matrix, FORWARD), (inverse(matrix), REVERSED)):
        trial = copy.deepcopy(builder)
        for layer in gadget_M_Minv(block_matrix, orientation, (top, bottom)):
            trial.add_layer(layer)
        trial.swap_registers(top, bottom)
        options.append(trial)
    return min(options, key=lambda trial: trial.depth)


def synth_linear_depth10(
    matrix: BinMatrix, seed: int = 0, budget: int = DEFAULT_BUDGET
) -> LayeredCircuit:
    """CNOT circuit of commutative depth at most 10 for M with invertible top-left block.

    Raises:
        OddWidthError: if the width is odd.
        UnsupportedDimensionError: if the registers hold fewer than 3 qubits.
        SingularMatrixError: if M or its top-left block is singular.
    """
    m = _half(matrix)
    if m < 3:
        raise UnsupportedDimensionError(f"registers of {m} qubits are too small, need 3")
    if not is_invertible(matrix):
        raise SingularMatrixError(f"matrix of width {matrix.rows} is singular")
    decomposition = schur(matrix, m)
    pair = commutator_decompose(decomposition.A @ decomposition.S, seed, budget)
    _reassembled(_factors(decomposition, pair), matrix)

    p, q = pair
    top, bottom = _registers(matrix.rows, m)
    builder = CircuitBuilder(matrix.rows)
    builder.add_addition(decomposition.AinvB, bottom, top)
    for factor in (q, p @ inverse(q), inverse(p), decomposition.A):
        builder = _with_inverse_pair(builder, factor, top, bottom)
    builder.add_addition(decomposition.CAinv, top, bottom)
    circuit = builder.finish()

    if to_linear_matrix(circuit) != matrix:
        raise ReassemblyError("depth-10 circuit does not compute its matrix")
    if depth(circuit) > 10:
        raise AssertionError(f"linear circuit of width {matrix.rows} has depth {depth(circuit)}")
    return circuit


def gaussian_elimination_circuit(matrix: BinMatrix) -> LayeredCircuit:
    """CNOT circuit for M with one gate per layer, by Gauss-Jordan elimination.

    Row operations reducing M to I are replayed backwards, since each CNOT is its own
    inverse.
    """
    if not is_invertible(matrix):
        raise SingularMatrixError(f"matrix of width {matrix.rows} is singular")
    bits = matrix.to_array().copy()
    operations = []
    for col in range(matrix.rows):
        if not bits[col, col]:
            source = col + int(np.flatnonzero(bits[col:, col])[0])
            bits[col] ^= bits[source]
            operations.append((source, col))
        for row in np.flatnonzero(bits[:, col]):
            if row != col:
                bits[row] ^= bits[col]
                operations.append((col, int(row)))
    gates = [(Cnot(control, target),) for control, target in reversed(operations)]
    return LayeredCircuit(matrix.rows, tuple(gates))


def synth_linear(matrix: BinMatrix, seed: int = 0, budget: int = DEFAULT_BUDGET) -> LayeredCircuit:
    """CNOT circuit of commutative depth at most 11 for any invertible M of even width.

    Widths below 6 leave no room for the commutator and fall back to
    `gaussian_elimination_circuit` followed by `compact_layers`. Each pivot column
    contributes at most two layers there, so the depth is at most 2n but is not
    bounded by 11 in general.

    Raises:
        OddWidthError: if the width is odd.
        SingularMatrixError: if M is singular.
    """
    m = _half(matrix)
    if not is_invertible(matrix):
        raise SingularMatrixError(f"matrix of width {matrix.rows} is singular")
    if matrix.rows < MIN_WIDTH:
        logger.warning("width %d is below %d, using Gaussian elimination", matrix.rows, MIN_WIDTH)
        return compact_layers(gaussian_elimination_circuit(matrix))
    x, layer = make_upper_block_invertible(matrix, m)
    inner = synth_linear_depth10(matrix @ _addition_matrix(x), seed, budget)
    builder = CircuitBuilder(matrix.rows)
    builder.add_layer(layer)
    for inner_layer in inner.layers:
        builder.add_layer(inner_layer)
    circuit = builder.finish()
    if to_linear_matrix(circuit) != matrix:
        raise ReassemblyError("linear circuit does not compute its matrix")
    if depth(circuit) > 11:
        raise AssertionError(f"linear circuit of width {matrix.rows} has depth {depth(circuit)}")
    logger.info(
        "linear map on %d wires: depth %d, size %s", matrix.rows, depth(circuit), size(circuit)
    )
    return circuit
