# Copyright 2022 Canonical Ltd.
# See LICENSE file for licensing details.

import itertools
import unittest
from unittest.mock import patch

import numpy as np
import pytest
from ccdepth.v0.circuit import Cnot, LayeredCircuit, depth, to_linear_matrix, validate_layer
from ccdepth.v0.gf2 import (
    BinMatrix,
    SingularMatrixError,
    block,
    identity,
    is_invertible,
    random_invertible,
    submatrix,
    zeros,
)
from ccdepth.v0.linsynth import (
    DEFAULT_BUDGET,
    CommutatorPair,
    OddWidthError,
    UnsupportedDimensionError,
    _blockwise_commutator,
    _Budget,
    commutator_decompose,
    decomposition_factors,
    gaussian_elimination_circuit,
    is_commutator,
    make_upper_block_invertible,
    reassemble_schur,
    schur,
    synth_linear,
    synth_linear_depth10,
)
from ccdepth.v0.prefixsynth import prefix_matrix
from parameterized import parameterized


def with_invertible_top_block(n: int, seeds):
    """Random invertible matrices whose top-left half block is invertible."""
    half = range(n // 2)
    for seed in seeds:
        matrix = random_invertible(n, seed=seed)
        if is_invertible(submatrix(matrix, half, half)):
            yield matrix


def swap_halves(m: int) -> BinMatrix:
    return block([[zeros(m, m), identity(m)], [identity(m), zeros(m, m)]])


class TestUpperBlock(unittest.TestCase):
    def test_invertible_block_needs_no_layer(self):
        matrix = next(with_invertible_top_block(8, range(100)))
        x, layer = make_upper_block_invertible(matrix, 4)
        assert x.is_zero()
        assert layer == ()

    @parameterized.expand([(3,), (4,), (7,)])
    def test_singular_block_is_repaired(self, m):
        for matrix in [swap_halves(m)] + [random_invertible(2 * m, seed=s) for s in range(20)]:
            _, layer = make_upper_block_invertible(matrix, m)
            assert validate_layer(layer)
            correction = to_linear_matrix(LayeredCircuit(2 * m, (layer,)))
            fixed = matrix @ correction
            assert is_invertible(submatrix(fixed, range(m), range(m)))

    def test_errors(self):
        with self.assertRaises(ValueError):
            make_upper_block_invertible(identity(4), 4)
        with self.assertRaises(SingularMatrixError):
            make_upper_block_invertible(zeros(4, 4), 2)


class TestSchur(unittest.TestCase):
    def test_reassembly(self):
        for matrix in with_invertible_top_block(10, range(40)):
            decomposition = schur(matrix, 5)
            assert reassemble_schur(decomposition) == matrix

    @pytest.mark.slow
    def test_factorization_over_many_matrices(self):
        top, bottom = range(4), range(4, 8)
        matrices = list(itertools.islice(with_invertible_top_block(8, range(50000)), 10000))
        assert len(matrices) == 10000
        for matrix in matrices:
            d = schur(matrix, 4)
            assert reassemble_schur(d) == matrix
            assert d.A == submatrix(matrix, top, top)
            assert d.D == submatrix(matrix, bottom, bottom)
            assert d.S == d.D + d.CAinv @ d.B
            assert d.CAinv @ d.A == d.C
            assert d.A @ d.AinvB == d.B

    def test_singular_top_block(self):
        with self.assertRaises(SingularMatrixError):
            schur(swap_halves(3), 3)


class TestCommutators(unittest.TestCase):
    def test_part_of_general_linear_3(self):
        matrices = (
            BinMatrix.from_array(np.array(bits, dtype=np.uint8).reshape(3, 3))
            for bits in itertools.product((0, 1), repeat=9)
        )
        invertible = [matrix for matrix in matrices if is_invertible(matrix)]
        assert len(invertible) == 168
        for w in invertible[::7]:
            assert is_commutator(commutator_decompose(w), w)

    @parameterized.expand([(n, seed) for n in (3, 4, 5, 8, 12) for seed in range(4)])
    def test_random_targets(self, n, seed):
        w = random_invertible(n, seed=1000 + seed)
        assert is_commutator(commutator_decompose(w, seed=seed), w)

    def test_prefix_target(self):
        w = prefix_matrix(9)
        assert is_commutator(commutator_decompose(w), w)

    def test_identity(self):
        pair = commutator_decompose(identity(5))
        assert pair == CommutatorPair(identity(5), identity(5))

    def test_deterministic(self):
        w = random_invertible(9, seed=2)
        assert commutator_decompose(w, seed=6) == commutator_decompose(w, seed=6)

    def test_errors(self):
        with self.assertRaises(UnsupportedDimensionError):
            commutator_decompose(identity(2))
        with self.assertRaises(SingularMatrixError):
            commutator_decompose(BinMatrix.from_rows(["110", "011", "101"]))

    def test_is_commutator(self):
        p = BinMatrix.from_rows(["100", "110", "001"])
        assert is_commutator(CommutatorPair(p, p), identity(3))
        assert not is_commutator(CommutatorPair(p, p), p)

    def test_shared_budget(self):
        parent = _Budget(3)
        child = parent.share(10)
        assert all(child.spend() for _ in range(3))
        assert not child.spend()
        assert parent.spent == 4
        capped = _Budget(10).share(2)
        assert capped.spend() and capped.spend()
        assert not capped.spend()

    def test_chunk_searches_draw_on_one_budget(self):
        def search(piece, rng, budget):
            budget.spend()
            return CommutatorPair(identity(piece.rows), identity(piece.rows))

        shared = _Budget(DEFAULT_BUDGET)
        with patch("ccdepth.v0.linsynth._unipotent_commutator", side_effect=search) as fake:
            _blockwise_commutator(prefix_matrix(9), np.random.default_rng(0), shared)
        assert fake.call_count >= 1
        assert shared.spent == fake.call_count
        for call in fake.call_args_list:
            assert call.args[2].parent is shared


class TestLinearSynthesis(unittest.TestCase):
    def test_decomposition_factors(self):
        matrix = next(with_invertible_top_block(8, range(100)))
        factors = decomposition_factors(matrix, seed=1)
        assert len(factors) == 6
        product = identity(8)
        for factor in factors:
            product = factor @ product
        assert product == matrix

    @parameterized.expand([(6,), (8,), (12,)])
    def test_depth_ten(self, n):
        for matrix in itertools.islice(with_invertible_top_block(n, range(200)), 3):
            circuit = synth_linear_depth10(matrix)
            assert depth(circuit) <= 10
            assert to_linear_matrix(circuit) == matrix

    def test_depth_ten_errors(self):
        with self.assertRaises(UnsupportedDimensionError):
            synth_linear_depth10(identity(4))
        with self.assertRaises(OddWidthError):
            synth_linear_depth10(identity(7))
        with self.assertRaises(SingularMatrixError):
            synth_linear_depth10(swap_halves(3))

    @parameterized.expand([(n, seed) for n in (6, 8, 10, 16, 20) for seed in range(3)])
    def test_depth_eleven(self, n, seed):
        matrix = random_invertible(n, seed=seed)
        circuit = synth_linear(matrix, seed=seed)
        assert circuit.width == n
        assert depth(circuit) <= 11
        assert all(validate_layer(layer) for layer in circuit.layers)
        assert all(type(gate) is Cnot for layer in circuit.layers for gate in layer)
        assert to_linear_matrix(circuit) == matrix

    def test_swap_of_halves(self):
        circuit = synth_linear(swap_halves(4))
        assert depth(circuit) <= 11
        assert to_linear_matrix(circuit) == swap_halves(4)

    def test_identity(self):
        circuit = synth_linear(identity(8))
        assert depth(circuit) <= 10
        assert to_linear_matrix(circuit).is_identity()

    def test_prefix_matrix(self):
        circuit = synth_linear(prefix_matrix(8))
        assert depth(circuit) <= 11
        assert to_linear_matrix(circuit) == prefix_matrix(8)

    def test_seed_determines_circuit(self):
        matrix = random_invertible(12, seed=8)
        assert synth_linear(matrix, seed=3) == synth_linear(matrix, seed=3)

    @parameterized.expand([(2,), (4,)])
    def test_small_widths_fall_back(self, n):
        for seed in range(10):
            matrix = random_invertible(n, seed=seed)
            with self.assertLogs("ccdepth.v0.linsynth", level="WARNING"):
                circuit = synth_linear(matrix)
            assert depth(circuit) <= 2 * n
            assert to_linear_matrix(circuit) == matrix

    def test_errors(self):
        with self.assertRaises(OddWidthError):
            synth_linear(identity(7))
        with self.assertRaises(SingularMatrixError):
            synth_linear(zeros(6, 6))
        with self.assertRaises(ValueError):
            synth_linear(zeros(2, 4))


class TestGaussianElimination(unittest.TestCase):
    @parameterized.expand([(seed,) for seed in range(6)])
    def test_computes_matrix(self, seed):
        matrix = random_invertible(5, seed=seed)
        circuit = gaussian_elimination_circuit(matrix)
        assert all(len(layer) == 1 for layer in circuit.layers)
        assert to_linear_matrix(circuit) == matrix

    def test_singular(self):
        with self.assertRaises(SingularMatrixError):
            gaussian_elimination_circuit(BinMatrix.from_rows(["11", "11"]))
