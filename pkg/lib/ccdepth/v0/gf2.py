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

"""Exact linear algebra over GF(2) on bit-packed matrices.

This library is the numerical engine of the synthesizers: every linear permutation
|x> -> |Mx> is carried by a `BinMatrix`, and every product, inverse, rank and
canonical form is computed exactly, without tolerances.

Rows are stored bit-packed (eight entries per byte, `numpy.packbits` order) and
the elementary operation is the XOR of two packed rows. Padding bits past the last
column are always zero, so packed rows can be compared and hashed directly.

Example:
```python

from ccdepth.v0.gf2 import BinMatrix, inverse, mul, rank

prefix = BinMatrix.from_rows(["100", "110", "111"])
assert mul(prefix, inverse(prefix)) == BinMatrix.identity(3)
assert rank(BinMatrix.from_rows(["110", "011", "101"])) == 2
```

Canonical forms are available for conjugacy questions. `frobenius_form` returns the
rational canonical form together with the change of basis, and `conjugator` answers
whether two matrices are similar, returning the similarity or `None`:

```python

from ccdepth.v0.gf2 import conjugator, frobenius_form, mul, inverse, random_invertible

a = random_invertible(5, seed=1)
g = random_invertible(5, seed=2)
b = mul(mul(g, a), inverse(g))
t = conjugator(a, b)
assert mul(mul(t, a), inverse(t)) == b
```

Polynomials over GF(2) (minimal polynomials, invariant factors) are `mpyc` binary
polynomials, created with `GF2X = mpyc.gfpx.GFpX(2)`.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from mpyc.gfpx import GFpX

# Increment this major API version when introducing breaking changes
LIBAPI = 0

# Increment this PATCH version before releasing, or reset
# to 0 if you are raising the major API version
LIBPATCH = 3

logger = logging.getLogger(__name__)

GF2X = GFpX(2)


class DimensionError(ValueError):
    """Raised when matrix shapes do not fit the requested operation."""


class SingularMatrixError(ValueError):
    """Raised when an invertible matrix is required but the input has rank deficit."""


class MatrixParseError(ValueError):
    """Raised when the matrix text format cannot be parsed."""


def _pack(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8) & 1
    if bits.ndim != 2:
        raise DimensionError(f"expected a two dimensional array, got {bits.ndim} dimensions")
    return np.packbits(bits, axis=1)


def _column_bits(data: np.ndarray, col: int) -> np.ndarray:
    return (data[:, col >> 3] >> (7 - (col & 7))) & 1


def _rref(data: np.ndarray, limit: int) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form of packed rows, pivoting on the first `limit` columns."""
    work = data.copy()
    pivots = []
    row = 0
    for col in range(limit):
        if row == work.shape[0]:
            break
        candidates = np.flatnonzero(_column_bits(work[row:], col))
        if not candidates.size:
            continue
        pivot = row + int(candidates[0])
        if pivot != row:
            work[[row, pivot]] = work[[pivot, row]]
        bits = _column_bits(work, col)
        bits[row] = 0
        work[np.flatnonzero(bits)] ^= work[row]
        pivots.append(col)
        row += 1
    return work, pivots


class BinMatrix:
    """Immutable binary matrix with bit-packed rows."""

    __slots__ = ("_rows", "_cols", "_data")

    def __init__(self, rows: int, cols: int, data: np.ndarray):
        expected = (rows, (cols + 7) // 8)
        if data.shape != expected:
            raise DimensionError(f"packed data has shape {data.shape}, expected {expected}")
        data = np.array(data, dtype=np.uint8)
        if cols % 8 and rows:
            data[:, -1] &= np.uint8((0xFF << (8 - cols % 8)) & 0xFF)
        data.setflags(write=False)
        self._rows = rows
        self._cols = cols
        self._data = data

    @classmethod
    def from_array(cls, bits) -> "BinMatrix":
        """Build a matrix from a 2-D array-like of 0/1 entries."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise DimensionError(f"expected a two dimensional array, got {bits.ndim} dimensions")
        return cls(bits.shape[0], bits.shape[1], _pack(bits))

    @classmethod
    def from_rows(cls, rows: Sequence) -> "BinMatrix":
        """Build a matrix from rows given as "0101" strings or sequences of bits."""
        parsed = [[int(bit) for bit in row] for row in rows]
        if len({len(row) for row in parsed}) > 1:
            raise DimensionError("rows have different lengths")
        width = len(parsed[0]) if parsed else 0
        return cls.from_array(np.array(parsed, dtype=np.uint8).reshape(len(parsed), width))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinMatrix":
        """All-zero matrix."""
        return cls(rows, cols, np.zeros((rows, (cols + 7) // 8), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BinMatrix":
        """Identity matrix of size n."""
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @property
    def rows(self) -> int:
        """Number of rows."""
        return self._rows

    @property
    def cols(self) -> int:
        """Number of columns."""
        return self._cols

    @property
    def shape(self) -> Tuple[int, int]:
        """The (rows, cols) pair."""
        return self._rows, self._cols

    @property
    def packed(self) -> np.ndarray:
        """Read-only view of the packed rows."""
        return self._data

    def to_array(self) -> np.ndarray:
        """Unpacked copy of the entries as a uint8 array."""
        if not self._cols:
            return np.zeros((self._rows, 0), dtype=np.uint8)
        return np.unpackbits(self._data, axis=1, count=self._cols)

    def row(self, i: int) -> np.ndarray:
        """Unpacked copy of row i."""
        return np.unpackbits(self._data[i], count=self._cols)

    def column(self, j: int) -> np.ndarray:
        """Unpacked copy of column j."""
        return _column_bits(self._data, j).astype(np.uint8)

    @property
    def T(self) -> "BinMatrix":  # noqa: N802
        """Transpose."""
        return transpose(self)

    def is_square(self) -> bool:
        """Whether rows == cols."""
        return self._rows == self._cols

    def is_identity(self) -> bool:
        """Whether this is an identity matrix."""
        return self.is_square() and self == BinMatrix.identity(self._rows)

    def is_zero(self) -> bool:
        """Whether every entry is zero."""
        return not self._data.any()

    def __getitem__(self, key: Tuple[int, int]) -> int:
        i, j = key
        if not (0 <= i < self._rows and 0 <= j < self._cols):
            raise IndexError(f"entry ({i}, {j}) outside a {self._rows}x{self._cols} matrix")
        return int((self._data[i, j >> 3] >> (7 - (j & 7))) & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._data, other._data)

    def __hash__(self) -> int:
        return hash((self._rows, self._cols, self._data.tobytes()))

    def __add__(self, other: "BinMatrix") -> "BinMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape} matrices")
        return BinMatrix(self._rows, self._cols, self._data ^ other._data)

    __xor__ = __add__

    def __matmul__(self, other: "BinMatrix") -> "BinMatrix":
        return mul(self, other)

    def __repr__(self) -> str:
        return f"BinMatrix({self._rows}x{self._cols}, {format_matrix(self).split()!r})"

    def __str__(self) -> str:
        return format_matrix(self)


def identity(n: int) -> BinMatrix:
    """Identity matrix of size n."""
    return BinMatrix.identity(n)


def zeros(rows: int, cols: int) -> BinMatrix:
    """All-zero matrix."""
    return BinMatrix.zeros(rows, cols)


def permutation_matrix(perm: Sequence[int]) -> BinMatrix:
    """Matrix sending basis vector e_i to e_perm[i]."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{list(perm)} is not a permutation of 0..{n - 1}")
    bits = np.zeros((n, n), dtype=np.uint8)
    bits[list(perm), list(range(n))] = 1
    return BinMatrix.from_array(bits)


def mul(a: BinMatrix, b: BinMatrix) -> BinMatrix:
    """Product a·b over GF(2).

    Each set entry a(i, k) XORs the packed row k of b into row i of the result.

    Raises:
        DimensionError: if a.cols != b.rows.
    """
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    a_bits = a.to_array().astype(bool)
    out = np.zeros((a.rows, b.packed.shape[1]), dtype=np.uint8)
    for k in range(a.cols):
        mask = a_bits[:, k]
        if mask.any():
            out[mask] ^= b.packed[k]
    return BinMatrix(a.rows, b.cols, out)


def transpose(a: BinMatrix) -> BinMatrix:
    """Transpose of a."""
    return BinMatrix.from_array(a.to_array().T)


def inverse(a: BinMatrix) -> BinMatrix:
    """Inverse of a square matrix by Gauss-Jordan elimination.

    Raises:
        DimensionError: if a is not square.
        SingularMatrixError: if a has rank below its size.
    """
    if not a.is_square():
        raise DimensionError(f"cannot invert a {a.rows}x{a.cols} matrix")
    n = a.rows
    augmented = _pack(np.hstack([a.to_array(), np.eye(n, dtype=np.uint8)]))
    reduced, pivots = _rref(augmented, n)
    if len(pivots) < n:
        raise SingularMatrixError(f"matrix of size {n} has rank {len(pivots)}")
    return BinMatrix.from_array(np.unpackbits(reduced, axis=1, count=2 * n)[:, n:])


def rank(a: BinMatrix) -> int:
    """Rank of a over GF(2)."""
    return len(_rref(a.packed, a.cols)[1])


def is_invertible(a: BinMatrix) -> bool:
    """Whether a is square with full rank."""
    return a.is_square() and rank(a) == a.rows


def independent_columns(a: BinMatrix) -> List[int]:
    """Indices of a maximal set of linearly independent columns, lowest indices first."""
    return _rref(a.packed, a.cols)[1]


def weight(a: BinMatrix) -> int:
    """Number of non-zero entries."""
    return int(np.unpackbits(a.packed).sum())


def anti_transpose(a: BinMatrix) -> BinMatrix:
    """Flip of a square matrix along its anti-diagonal.

    Entry (i, j) of the result is entry (n-1-j, n-1-i) of a, which is B·aᵀ·B for the
    reversal permutation B.
    """
    if not a.is_square():
        raise DimensionError(f"cannot anti-transpose a {a.rows}x{a.cols} matrix")
    return BinMatrix.from_array(a.to_array()[::-1, ::-1].T)


def direct_sum(*blocks: BinMatrix) -> BinMatrix:
    """Block-diagonal matrix with the given blocks."""
    rows = sum(block.rows for block in blocks)
    cols = sum(block.cols for block in blocks)
    bits = np.zeros((rows, cols), dtype=np.uint8)
    r = c = 0
    for block in blocks:
        bits[r : r + block.rows, c : c + block.cols] = block.to_array()
        r += block.rows
        c += block.cols
    return BinMatrix.from_array(bits)


def block(grid: Sequence[Sequence[BinMatrix]]) -> BinMatrix:
    """Assemble a matrix from a grid of blocks with matching row and column sizes."""
    try:
        bits = np.block([[cell.to_array() for cell in row] for row in grid])
    except ValueError as e:
        raise DimensionError(f"blocks do not fit together: {e}") from e
    return BinMatrix.from_array(bits)


def submatrix(a: BinMatrix, rows: Iterable[int], cols: Iterable[int]) -> BinMatrix:
    """Entries of a at the given row and column indices, in the given order."""
    return BinMatrix.from_array(a.to_array()[np.ix_(list(rows), list(cols))])


def solve(a: BinMatrix, b: BinMatrix) -> Optional[BinMatrix]:
    """One solution X of a·X = b, or None when the system is inconsistent.

    Free variables are set to zero, so the answer is deterministic.
    """
    if a.rows != b.rows:
        raise DimensionError(f"cannot solve {a.shape} against {b.shape}")
    n = a.cols
    augmented = _pack(np.hstack([a.to_array(), b.to_array()]))
    reduced, pivots = _rref(augmented, n)
    bits = np.unpackbits(reduced, axis=1, count=n + b.cols)
    if bits[len(pivots) :, n:].any():
        return None
    x = np.zeros((n, b.cols), dtype=np.uint8)
    for i, col in enumerate(pivots):
        x[col] = bits[i, n:]
    return BinMatrix.from_array(x)


def nullspace(a: BinMatrix) -> BinMatrix:
    """Matrix whose columns are a basis of {x : a·x = 0}."""
    reduced, pivots = _rref(a.packed, a.cols)
    bits = np.unpackbits(reduced, axis=1, count=a.cols) if a.cols else np.zeros((a.rows, 0))
    free = [j for j in range(a.cols) if j not in set(pivots)]
    basis = np.zeros((a.cols, len(free)), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, col in enumerate(pivots):
            basis[col, k] = bits[i, f]
    return BinMatrix.from_array(basis)


def random_invertible(n: int, seed: int = 0, rng: np.random.Generator = None) -> BinMatrix:
    """Uniformly random invertible n×n matrix.

    Uniform 0/1 matrices are drawn from `numpy.random.default_rng(seed)` until one has
    full rank; since more than 28% of all binary matrices are invertible this takes
    fewer than four draws on average and keeps the distribution uniform on GL(n, 2).
    Passing `rng` continues an existing stream instead of seeding a new one.
    """
    if n < 1:
        raise ValueError(f"size must be at least 1, got {n}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    while True:
        candidate = BinMatrix.from_array(rng.integers(0, 2, size=(n, n), dtype=np.uint8))
        if rank(candidate) == n:
            return candidate


def companion_matrix(poly) -> BinMatrix:
    """Companion matrix of a monic GF(2) polynomial of degree d >= 1.

    Ones on the subdiagonal and the low coefficients c_0..c_{d-1} in the last column,
    so the matrix maps e_i to e_{i+1} and e_{d-1} to the coefficient vector.
    """
    value = int(poly)
    d = value.bit_length() - 1
    if d < 1:
        raise ValueError(f"polynomial {poly} has no companion matrix")
    bits = np.zeros((d, d), dtype=np.uint8)
    bits[np.arange(1, d), np.arange(d - 1)] = 1
    bits[:, d - 1] = [(value >> i) & 1 for i in range(d)]
    return BinMatrix.from_array(bits)


def _matvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ v) % 2


def _apply_polynomial(a: np.ndarray, poly: int, v: np.ndarray) -> np.ndarray:
    result = np.zeros_like(v)
    for i in reversed(range(poly.bit_length())):
        result = _matvec(a, result)
        if (poly >> i) & 1:
            result = result ^ v
    return result.astype(np.uint8)


def _local_minimal_polynomial(a: np.ndarray, v: np.ndarray) -> int:
    """Monic polynomial p of least degree with p(a)·v = 0, as an integer bit mask."""
    reduced = []
    w = v.astype(np.uint8)
    degree = 0
    while True:
        vec = w.copy()
        combo = 1 << degree
        for pivot, rv, rc in reduced:
            if vec[pivot]:
                vec ^= rv
                combo ^= rc
        if not vec.any():
            return combo
        reduced.append((int(np.flatnonzero(vec)[0]), vec, combo))
        w = _matvec(a, w).astype(np.uint8)
        degree += 1


def _coprime_split(p: int, q: int) -> Tuple[int, int]:
    """Divisors a | p and b | q, coprime, with a·b = lcm(p, q)."""
    a = GF2X(p)
    b = GF2X(q) // GF2X.gcd(p, q)
    h = GF2X.gcd(a, b)
    while h.degree() > 0:
        a = a // h
        b = b * h
        h = GF2X.gcd(a, b)
    return int(a), int(b)


def _maximal_vector(a: np.ndarray) -> Tuple[np.ndarray, int]:
    """A vector whose local minimal polynomial is the minimal polynomial of a."""
    k = a.shape[0]
    basis = np.eye(k, dtype=np.uint8)
    v = basis[0]
    p = _local_minimal_polynomial(a, v)
    for j in range(1, k):
        if p.bit_length() - 1 == k:
            break
        q = _local_minimal_polynomial(a, basis[j])
        if int(GF2X(p) % GF2X(q)) == 0:
            continue
        left, right = _coprime_split(p, q)
        v = _apply_polynomial(a, int(GF2X(p) // GF2X(left)), v) ^ _apply_polynomial(
            a, int(GF2X(q) // GF2X(right)), basis[j]
        )
        p = int(GF2X(left) * GF2X(right))
    return v, p


def _cyclic_decomposition(a: np.ndarray) -> List[Tuple[int, np.ndarray]]:
    """Split the space into a-cyclic subspaces with invariant factors, largest first.

    Each entry is (polynomial, basis) where the basis columns are v, a·v, ..., a^(d-1)·v
    in the coordinates of `a`.
    """
    k = a.shape[0]
    if not k:
        return []
    v, mu = _maximal_vector(a)
    d = mu.bit_length() - 1
    krylov = np.zeros((k, d), dtype=np.uint8)
    w = v
    for i in range(d):
        krylov[:, i] = w
        w = _matvec(a, w).astype(np.uint8)
    if d == k:
        return [(mu, krylov)]

    # A functional vanishing on v..a^(d-2)v and one on a^(d-1)v cuts out an a-invariant
    # complement of the cyclic subspace.
    target = np.zeros((d, 1), dtype=np.uint8)
    target[d - 1, 0] = 1
    phi = solve(BinMatrix.from_array(krylov.T), BinMatrix.from_array(target))
    phi = phi.to_array()[:, 0]
    functionals = np.zeros((d, k), dtype=np.uint8)
    for i in range(d):
        functionals[i] = phi
        phi = _matvec(a.T, phi).astype(np.uint8)
    complement = nullspace(BinMatrix.from_array(functionals))
    image = BinMatrix.from_array(_matvec(a, complement.to_array()).astype(np.uint8))
    restricted = solve(complement, image)
    inner = _cyclic_decomposition(restricted.to_array())
    basis = complement.to_array().astype(np.int64)
    return [(mu, krylov)] + [(poly, ((basis @ vecs) % 2).astype(np.uint8)) for poly, vecs in inner]


def frobenius_form(a: BinMatrix) -> Tuple[BinMatrix, BinMatrix]:
    """Rational canonical form of a square matrix, with its change of basis.

    Returns:
        (F, T) with T·a·T⁻¹ == F, where F is block diagonal with companion matrices
        of the invariant factors, largest first (each divides the previous one).
    """
    if not a.is_square():
        raise DimensionError(f"no canonical form for a {a.rows}x{a.cols} matrix")
    decomposition = _cyclic_decomposition(a.to_array())
    basis = BinMatrix.from_array(np.hstack([vecs for _, vecs in decomposition]))
    form = direct_sum(*[companion_matrix(poly) for poly, _ in decomposition])
    transform = inverse(basis)
    if mul(mul(transform, a), basis) != form:
        raise AssertionError("cyclic decomposition does not reproduce the companion blocks")
    logger.debug(
        "frobenius form of size %d has invariant factors %s",
        a.rows,
        [GF2X(poly) for poly, _ in decomposition],
    )
    return form, transform


def invariant_factors(a: BinMatrix) -> list:
    """Invariant factors of a as GF(2) polynomials, largest first."""
    return [GF2X(poly) for poly, _ in _cyclic_decomposition(a.to_array())]


def minimal_polynomial(a: BinMatrix):
    """Minimal polynomial of a square matrix."""
    if not a.is_square():
        raise DimensionError(f"no minimal polynomial for a {a.rows}x{a.cols} matrix")
    if not a.rows:
        return GF2X(1)
    return GF2X(_maximal_vector(a.to_array())[1])


def conjugator(a: BinMatrix, b: BinMatrix) -> Optional[BinMatrix]:
    """A matrix T with T·a·T⁻¹ == b, or None when a and b are not similar."""
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare {a.shape} and {b.shape} matrices")
    form_a, transform_a = frobenius_form(a)
    form_b, transform_b = frobenius_form(b)
    if form_a != form_b:
        return None
    return mul(inverse(transform_b), transform_a)


def parse_matrix(text: str) -> BinMatrix:
    """Parse the matrix text format.

    Lines starting with `#` are comments; every other non-empty line is one row of
    `0`/`1` characters without separators.

    Raises:
        MatrixParseError: on foreign characters, ragged rows or an empty matrix.
    """
    rows = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) - {"0", "1"}:
            raise MatrixParseError(f"line {number}: only 0 and 1 are allowed, got {line!r}")
        if rows and len(line) != len(rows[0]):
            raise MatrixParseError(
                f"line {number}: row has {len(line)} entries, expected {len(rows[0])}"
            )
        rows.append(line)
    if not rows:
        raise MatrixParseError("no matrix rows found")
    return BinMatrix.from_rows(rows)


def format_matrix(a: BinMatrix) -> str:
    """Render a matrix in the text format, one row per line."""
    return "\n".join("".join(str(int(bit)) for bit in row) for row in a.to_array())
