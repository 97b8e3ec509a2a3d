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

"""Counting bounds on commutative depth, and exact minimum depths for small widths.

One commuting layer of CNOTs splits the qubits into controls C and targets T and adds
X·x_C into x_T, so there are at most 2^n · 2^⌊n²/4⌋ such layers. Depth-d circuits
therefore reach at most d · 2^(d(⌊n²/4⌋ + n)) linear maps, which falls short of the
order of GL(n, 2) once n is large enough:

```python

from ccdepth.v0.bounds import linear_depth_feasibility, smallest_insufficient_n

assert linear_depth_feasibility(64, 3).insufficient
n = smallest_insufficient_n(3)  # first width where depth 3 cannot cover GL(n, 2)
```

The same counting for Clifford operations uses `clifford_count` and
`clifford_layer_count`, and the size bound uses `size_bound_check`. Everything is
exact integer or `fractions.Fraction` arithmetic.

For n <= 4, `exhaustive_min_depth` runs a breadth-first search over GL(n, 2) with one
generator per distinct single-layer transformation, and reports how many elements
need each minimum depth. `min_depth_search` keeps a witness circuit for every element.
"""

import functools
import itertools
import logging
import math
from collections import deque, namedtuple
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ccdepth.v0.circuit import Cnot, LayeredCircuit
from ccdepth.v0.gf2 import BinMatrix, DimensionError, is_invertible

# Increment this major API version when introducing breaking changes
LIBAPI = 0

# Increment this PATCH version before releasing, or reset
# to 0 if you are raising the major API version
LIBPATCH = 2

logger = logging.getLogger(__name__)

MAX_SEARCH_WIDTH = 4

Verdict = namedtuple("Verdict", "insufficient reachable_bound group_order")
Verdict.__doc__ = """
Outcome of a counting argument at one width and depth.

`insufficient` is true when the number of operations reachable within the depth,
bounded by `reachable_bound`, is below `group_order`, so some operation needs more.
"""

BoundsReport = namedtuple(
    "BoundsReport",
    [
        "n",
        "d",
        "s",
        "gl_count",
        "layer_count_bound",
        "depth_circuit_bound",
        "linear_insufficient",
        "clifford_count",
        "clifford_layer_count",
        "clifford_insufficient",
        "size_threshold",
        "largest_inside_size",
        "inside_size_region",
    ],
)
BoundsReport.__doc__ = """
All counting quantities at width n, depth d and two-qubit size s.

`size_threshold` is None when d is not a power of two, since n²/(2(1 + log2 d)) is
then irrational; `largest_inside_size` is exact for every d. `inside_size_region` is
None when no size was given.
"""


class SearchTooLargeError(ValueError):
    """Exhaustive search requested beyond the supported width."""


def count_invertible(n: int) -> int:
    """Order of GL(n, 2): the product of 2^n - 2^i for i < n."""
    if n < 1:
        raise ValueError(f"width must be at least 1, got {n}")
    return math.prod((1 << n) - (1 << i) for i in range(n))


def clifford_count(n: int) -> int:
    """Number of n-qubit Clifford operations up to global phase."""
    if n < 1:
        raise ValueError(f"width must be at least 1, got {n}")
    return (1 << (n * n + 2 * n)) * math.prod(4**j - 1 for j in range(1, n + 1))


def layer_exponent(n: int) -> int:
    """Exponent e with at most 2^e distinct single CNOT layers on n qubits.

    Idle qubits count as controls without targets, so a layer is a split into C and T
    (2^n choices) with a |T| x |C| matrix, and |C|·|T| <= ⌊n²/4⌋.
    """
    return n * n // 4 + n


def depth_circuit_bound(n: int, d: int) -> int:
    """Bound d·2^(d·e) on linear maps reachable in depth d; 1 (the identity) for d = 0."""
    if d < 0:
        raise ValueError(f"depth must be non-negative, got {d}")
    if d == 0:
        return 1
    return d << (d * layer_exponent(n))


def linear_depth_feasibility(n: int, d: int) -> Verdict:
    """Whether depth d provably cannot cover GL(n, 2) by counting."""
    reachable = depth_circuit_bound(n, d)
    order = count_invertible(n)
    return Verdict(reachable < order, reachable, order)


def smallest_insufficient_n(d: int, n_max: int = 64) -> Optional[int]:
    """First width n <= n_max at which depth d is provably insufficient, or None.

    Raises:
        AssertionError: if a larger width up to n_max is not insufficient as well.
    """
    found = None
    for n in range(1, n_max + 1):
        insufficient = linear_depth_feasibility(n, d).insufficient
        if found is None and insufficient:
            found = n
        elif found is not None and not insufficient:
            raise AssertionError(f"depth {d} is insufficient at n={found} but not at n={n}")
    logger.info("depth %d: smallest insufficient width %s (checked up to %d)", d, found, n_max)
    return found


def clifford_layer_count(n: int) -> int:
    """Number of descriptions of one commuting layer of Clifford gates on n qubits.

    i qubits carry one of 24 single-qubit gates; each other qubit carries the Pauli
    (X, Y or Z) shared by every generalized CNOT touching it, and any set of pairs of
    them holds a gate.
    """
    total = 0
    for i in range(n + 1):
        rest = n - i
        total += math.comb(n, i) * 3**rest * 2 ** (rest * (rest - 1) // 2) * 24**i
    return total


def clifford_depth_feasibility(n: int, d: int) -> Verdict:
    """Whether depth d provably cannot cover the n-qubit Clifford group by counting."""
    if d < 0:
        raise ValueError(f"depth must be non-negative, got {d}")
    layers = clifford_layer_count(n)
    reachable = sum(layers**j for j in range(d + 1))
    order = clifford_count(n)
    return Verdict(reachable < order, reachable, order)


def _log2_exact(d: int) -> int:
    if d < 1 or d & (d - 1):
        raise ValueError(f"log2({d}) is not an integer")
    return d.bit_length() - 1


def size_threshold(n: int, d: int) -> Fraction:
    """The two-qubit size n²/(2(1 + log2 d)) for d a power of two.

    Raises:
        ValueError: if d is not a power of two.
    """
    return Fraction(n * n, 2 * (1 + _log2_exact(d)))


def _inside(n: int, d: int, s: int) -> bool:
    # s <= n²/(2(1 + log2 d))  <=>  (2d)^(2s) <= 2^(n²)
    return s <= 0 or (2 * d) ** (2 * s) <= 1 << (n * n)


def largest_inside_size(n: int, d: int) -> int:
    """Largest s with s <= n²/(2(1 + log2 d)), exact for every d >= 1."""
    if d < 1:
        raise ValueError(f"depth must be at least 1, got {d}")
    low, high = 0, n * n
    while low < high:
        middle = (low + high + 1) // 2
        if _inside(n, d, middle):
            low = middle
        else:
            high = middle - 1
    return low


def size_bound_check(n: int, d: int, s: int) -> bool:
    """Whether (d, s) lies where depth-d circuits of s two-qubit gates miss some Clifford.

    That is the region d <= n/5 and s <= n²/(2(1 + log2 d)).
    """
    if d < 1:
        raise ValueError(f"depth must be at least 1, got {d}")
    return 5 * d <= n and _inside(n, d, s)


def bounds_report(n: int, d: int = 3, s: Optional[int] = None) -> BoundsReport:
    """Every counting quantity at (n, d, s) in one record."""
    if n < 1:
        raise ValueError(f"width must be at least 1, got {n}")
    linear = linear_depth_feasibility(n, d)
    try:
        threshold = size_threshold(n, d)
    except ValueError:
        threshold = None
    return BoundsReport(
        n=n,
        d=d,
        s=s,
        gl_count=linear.group_order,
        layer_count_bound=1 << layer_exponent(n),
        depth_circuit_bound=linear.reachable_bound,
        linear_insufficient=linear.insufficient,
        clifford_count=clifford_count(n),
        clifford_layer_count=clifford_layer_count(n),
        clifford_insufficient=clifford_depth_feasibility(n, d).insufficient,
        size_threshold=threshold,
        largest_inside_size=largest_inside_size(n, d) if d >= 1 else None,
        inside_size_region=size_bound_check(n, d, s) if s is not None and d >= 1 else None,
    )


Rows = Tuple[int, ...]
Generator = Tuple[Tuple[int, Tuple[int, ...]], ...]


def _identity_rows(n: int) -> Rows:
    return tuple(1 << i for i in range(n))


def _layer_generators(n: int) -> List[Generator]:
    """Every distinct non-identity layer I + E, as (target, controls) pairs.

    Assignments of qubits to controls, targets or idle with every X matrix repeat the
    same transformation many times; each resulting matrix is kept once.
    """
    seen = set()
    generators = []
    for roles in itertools.product("CTI", repeat=n):
        controls = [q for q, role in enumerate(roles) if role == "C"]
        targets = [q for q, role in enumerate(roles) if role == "T"]
        for entries in itertools.product((0, 1), repeat=len(controls) * len(targets)):
            generator = tuple(
                (t, tuple(c for k, c in enumerate(controls) if entries[i * len(controls) + k]))
                for i, t in enumerate(targets)
            )
            generator = tuple((t, cs) for t, cs in generator if cs)
            if generator and generator not in seen:
                seen.add(generator)
                generators.append(generator)
    logger.debug("%d distinct layer transformations on %d qubits", len(generators), n)
    return generators


def _apply(generator: Generator, rows: Rows) -> Rows:
    out = list(rows)
    for t, controls in generator:
        for c in controls:
            out[t] ^= rows[c]
    return tuple(out)


def _to_rows(matrix: BinMatrix) -> Rows:
    bits = matrix.to_array()
    return tuple(int(sum(int(b) << j for j, b in enumerate(row))) for row in bits)


def _to_matrix(rows: Rows, n: int) -> BinMatrix:
    return BinMatrix.from_array(
        np.array([[(row >> j) & 1 for j in range(n)] for row in rows], dtype=np.uint8)
    )


class DepthSearch:
    """Minimum commutative depth of every element of GL(n, 2), with witnesses."""

    def __init__(self, width: int, parents: Dict[Rows, Tuple[Optional[Rows], int]], depths):
        self._width = width
        self._parents = parents
        self._depths = depths
        self._generators = _layer_generators(width)

    @property
    def width(self) -> int:
        """Number of qubits."""
        return self._width

    @property
    def histogram(self) -> Dict[int, int]:
        """Number of elements at each minimum depth."""
        counts: Dict[int, int] = {}
        for value in self._depths.values():
            counts[value] = counts.get(value, 0) + 1
        return dict(sorted(counts.items()))

    def __len__(self) -> int:
        return len(self._depths)

    def __iter__(self):
        return (_to_matrix(rows, self._width) for rows in self._depths)

    def depth_of(self, matrix: BinMatrix) -> int:
        """Minimum commutative depth of an invertible matrix."""
        return self._depths[self._key(matrix)]

    def witness(self, matrix: BinMatrix) -> LayeredCircuit:
        """CNOT circuit of minimum commutative depth computing the matrix."""
        rows = self._key(matrix)
        layers = []
        while True:
            parent, index = self._parents[rows]
            if parent is None:
                break
            generator = self._generators[index]
            layers.append(tuple(Cnot(c, t) for t, controls in generator for c in controls))
            rows = parent
        return LayeredCircuit(self._width, tuple(reversed(layers)))

    def _key(self, matrix: BinMatrix) -> Rows:
        if matrix.shape != (self._width, self._width):
            raise DimensionError(f"expected a {self._width}x{self._width} matrix")
        if not is_invertible(matrix):
            raise ValueError("singular matrices have no circuit")
        return _to_rows(matrix)


@functools.lru_cache(maxsize=None)
def min_depth_search(n: int) -> DepthSearch:
    """Breadth-first search over GL(n, 2) from the identity, one layer per step.

    Raises:
        SearchTooLargeError: if n exceeds 4.
    """
    if not 1 <= n <= MAX_SEARCH_WIDTH:
        raise SearchTooLargeError(f"exhaustive search supports 1 <= n <= {MAX_SEARCH_WIDTH}")
    generators = _layer_generators(n)
    start = _identity_rows(n)
    parents: Dict[Rows, Tuple[Optional[Rows], int]] = {start: (None, -1)}
    depths = {start: 0}
    queue = deque([start])
    while queue:
        rows = queue.popleft()
        for index, generator in enumerate(generators):
            successor = _apply(generator, rows)
            if successor not in depths:
                depths[successor] = depths[rows] + 1
                parents[successor] = (rows, index)
                queue.append(successor)
    logger.info("GL(%d, 2): %d elements, maximum depth %d", n, len(depths), max(depths.values()))
    return DepthSearch(n, parents, depths)


def exhaustive_min_depth(n: int) -> Dict[int, int]:
    """Number of elements of GL(n, 2) at each minimum commutative depth, for n <= 4."""
    return min_depth_search(n).histogram
