# Copyright 2022 Canonical Ltd.
# See LICENSE file for licensing details.

import itertools
import unittest

import numpy as np
import pytest
from ccdepth.v0.gf2 import (
    BinMatrix,
    DimensionError,
    MatrixParseError,
    SingularMatrixError,
    anti_transpose,
    block,
    companion_matrix,
    conjugator,
    direct_sum,
    format_matrix,
    frobenius_form,
    identity,
    independent_columns,
    inverse,
    invariant_factors,
    is_invertible,
    minimal_polynomial,
    mul,
    nullspace,
    parse_matrix,
    permutation_matrix,
    random_invertible,
    rank,
    solve,
    submatrix,
    transpose,
    weight,
    zeros,
)
from parameterized import parameterized


def naive_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            total = 0
            for k in range(a.shape[1]):
                total ^= int(a[i, k]) & int(b[k, j])
            out[i, j] = total
    return out


class TestBinMatrix(unittest.TestCase):
    def test_padding_bits_are_masked(self):
        matrix = BinMatrix(1, 3, np.array([[0xFF]], dtype=np.uint8))
        assert matrix.packed[0, 0] == 0xE0
        assert matrix == BinMatrix.from_rows(["111"])
        assert hash(matrix) == hash(BinMatrix.from_rows(["111"]))

    def test_packed_data_is_read_only(self):
        matrix = BinMatrix.identity(9)
        with self.assertRaises(ValueError):
            matrix.packed[0, 0] = 0

    def test_wrong_packed_shape(self):
        with self.assertRaises(DimensionError):
            BinMatrix(2, 9, np.zeros((2, 1), dtype=np.uint8))

    def test_accessors(self):
        matrix = BinMatrix.from_rows(["101", "011"])
        assert matrix.shape == (2, 3)
        assert matrix[0, 2] == 1 and matrix[1, 0] == 0
        assert list(matrix.row(1)) == [0, 1, 1]
        assert list(matrix.column(2)) == [1, 1]
        assert matrix.T == BinMatrix.from_rows(["10", "01", "11"])
        with self.assertRaises(IndexError):
            matrix[2, 0]

    def test_predicates(self):
        assert identity(4).is_identity()
        assert zeros(2, 5).is_zero()
        assert not BinMatrix.from_rows(["10", "11"]).is_identity()
        assert not zeros(2, 3).is_square()

    def test_addition_is_xor(self):
        a = BinMatrix.from_rows(["110", "011"])
        b = BinMatrix.from_rows(["100", "111"])
        assert a + b == BinMatrix.from_rows(["010", "100"])
        assert (a ^ a).is_zero()
        with self.assertRaises(DimensionError):
            a + identity(2)

    def test_ragged_rows(self):
        with self.assertRaises(DimensionError):
            BinMatrix.from_rows(["10", "1"])


class TestArithmetic(unittest.TestCase):
    def test_mul_matches_naive_product(self):
        rng = np.random.default_rng(11)
        for _ in range(400):
            r, k, c = rng.integers(1, 7, size=3)
            a = rng.integers(0, 2, size=(r, k), dtype=np.uint8)
            b = rng.integers(0, 2, size=(k, c), dtype=np.uint8)
            product = mul(BinMatrix.from_array(a), BinMatrix.from_array(b))
            assert np.array_equal(product.to_array(), naive_product(a, b))

    @pytest.mark.slow
    def test_mul_matches_integer_product_mod_2(self):
        rng = np.random.default_rng(12)
        for _ in range(100000):
            r, k, c = rng.integers(1, 12, size=3)
            a = rng.integers(0, 2, size=(r, k), dtype=np.uint8)
            b = rng.integers(0, 2, size=(k, c), dtype=np.uint8)
            product = mul(BinMatrix.from_array(a), BinMatrix.from_array(b))
            assert np.array_equal(product.to_array(), (a.astype(np.int64) @ b) % 2)

    def test_mul_exhaustive_two_by_two(self):
        matrices = [
            BinMatrix.from_array(np.array(bits, dtype=np.uint8).reshape(2, 2))
            for bits in itertools.product((0, 1), repeat=4)
        ]
        for a, b in itertools.product(matrices, repeat=2):
            assert np.array_equal((a @ b).to_array(), naive_product(a.to_array(), b.to_array()))

    def test_mul_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            mul(zeros(2, 3), zeros(2, 3))

    @parameterized.expand([(1,), (2,), (5,), (9,), (17,)])
    def test_inverse_of_random_invertible(self, n):
        matrix = random_invertible(n, seed=n)
        assert mul(matrix, inverse(matrix)).is_identity()
        assert mul(inverse(matrix), matrix).is_identity()

    def test_inverse_of_prefix_matrix(self):
        prefix = BinMatrix.from_rows(["100", "110", "111"])
        assert inverse(prefix) == BinMatrix.from_rows(["100", "110", "011"])

    def test_inverse_of_singular(self):
        with self.assertRaises(SingularMatrixError):
            inverse(BinMatrix.from_rows(["11", "11"]))
        with self.assertRaises(DimensionError):
            inverse(zeros(2, 3))

    @parameterized.expand(
        [
            (["110", "011", "101"], 2),
            (["100", "010", "001"], 3),
            (["000", "000"], 0),
            (["1111"], 1),
        ]
    )
    def test_rank(self, rows, expected):
        assert rank(BinMatrix.from_rows(rows)) == expected

    def test_invertible_count_two_by_two(self):
        count = sum(
            is_invertible(BinMatrix.from_array(np.array(bits, dtype=np.uint8).reshape(2, 2)))
            for bits in itertools.product((0, 1), repeat=4)
        )
        assert count == 6

    def test_independent_columns(self):
        matrix = BinMatrix.from_rows(["1101", "0110"])
        assert independent_columns(matrix) == [0, 1]
        assert independent_columns(zeros(2, 2)) == []

    def test_weight_and_transpose(self):
        matrix = BinMatrix.from_rows(["1101", "0110"])
        assert weight(matrix) == 5
        assert transpose(transpose(matrix)) == matrix

    def test_solve(self):
        a = BinMatrix.from_rows(["110", "011"])
        b = BinMatrix.from_rows(["1", "0"])
        x = solve(a, b)
        assert mul(a, x) == b
        assert solve(BinMatrix.from_rows(["11", "11"]), BinMatrix.from_rows(["1", "0"])) is None

    def test_nullspace(self):
        a = BinMatrix.from_rows(["110", "011"])
        kernel = nullspace(a)
        assert kernel.shape == (3, 1)
        assert mul(a, kernel).is_zero()
        assert nullspace(identity(3)).shape == (3, 0)

    def test_random_invertible_is_deterministic(self):
        assert random_invertible(8, seed=4) == random_invertible(8, seed=4)
        assert is_invertible(random_invertible(8, seed=4))
        with self.assertRaises(ValueError):
            random_invertible(0)

    @pytest.mark.slow
    def test_random_invertible_has_full_rank(self):
        for seed in range(10000):
            assert rank(random_invertible(3, seed=seed)) == 3, seed

    def test_random_invertible_reaches_all_of_general_linear_3(self):
        drawn = {random_invertible(3, seed=seed) for seed in range(5000)}
        assert len(drawn) == 168


class TestStructure(unittest.TestCase):
    def test_anti_transpose(self):
        matrix = BinMatrix.from_rows(["110", "000", "000"])
        assert anti_transpose(matrix) == BinMatrix.from_rows(["000", "001", "001"])

    def test_anti_transpose_is_reversal_conjugate_of_transpose(self):
        reversal = permutation_matrix([4, 3, 2, 1, 0])
        for seed in range(5):
            matrix = random_invertible(5, seed=seed)
            assert anti_transpose(matrix) == reversal @ transpose(matrix) @ reversal

    def test_permutation_matrix(self):
        perm = permutation_matrix([2, 0, 1])
        assert list(perm.column(0)) == [0, 0, 1]
        with self.assertRaises(ValueError):
            permutation_matrix([0, 0, 1])

    def test_block_and_direct_sum(self):
        a = BinMatrix.from_rows(["11"])
        b = identity(1)
        assert direct_sum(a, b) == BinMatrix.from_rows(["110", "001"])
        assert block([[identity(1), zeros(1, 1)], [b, b]]) == BinMatrix.from_rows(["10", "11"])
        with self.assertRaises(DimensionError):
            block([[identity(2), zeros(1, 1)]])

    def test_submatrix(self):
        matrix = BinMatrix.from_rows(["101", "010", "111"])
        assert submatrix(matrix, [0, 2], [0, 1]) == BinMatrix.from_rows(["10", "11"])


class TestCanonicalForms(unittest.TestCase):
    @parameterized.expand([(seed,) for seed in range(10)])
    def test_frobenius_post_condition(self, seed):
        matrix = random_invertible(5, seed=seed)
        form, transform = frobenius_form(matrix)
        assert mul(mul(transform, matrix), inverse(transform)) == form

    def test_frobenius_of_identity_and_zero(self):
        form, _ = frobenius_form(identity(3))
        assert form == identity(3)
        assert [int(p) for p in invariant_factors(identity(3))] == [3, 3, 3]
        assert [int(p) for p in invariant_factors(zeros(2, 2))] == [2, 2]

    def test_invariant_factors_divide(self):
        for seed in range(10):
            factors = invariant_factors(random_invertible(6, seed=seed))
            assert sum(p.degree() for p in factors) == 6
            for bigger, smaller in zip(factors, factors[1:]):
                assert int(bigger % smaller) == 0

    def test_minimal_polynomial(self):
        assert int(minimal_polynomial(identity(4))) == 0b11
        assert int(minimal_polynomial(zeros(3, 3))) == 0b10
        # x^3 + x + 1
        assert int(minimal_polynomial(companion_matrix(0b1011))) == 0b1011

    def test_companion_matrix(self):
        assert companion_matrix(0b111) == BinMatrix.from_rows(["01", "11"])
        with self.assertRaises(ValueError):
            companion_matrix(1)

    @parameterized.expand([(seed,) for seed in range(8)])
    def test_conjugator_of_similar_matrices(self, seed):
        a = random_invertible(6, seed=seed)
        g = random_invertible(6, seed=100 + seed)
        b = g @ a @ inverse(g)
        t = conjugator(a, b)
        assert t @ a @ inverse(t) == b

    def test_conjugator_of_non_similar_matrices(self):
        assert conjugator(identity(3), companion_matrix(0b1011)) is None
        with self.assertRaises(DimensionError):
            conjugator(identity(2), identity(3))


class TestTextFormat(unittest.TestCase):
    def test_parse_with_comments(self):
        text = "# a prefix matrix\n100\n110\n\n111\n"
        assert parse_matrix(text) == BinMatrix.from_rows(["100", "110", "111"])

    def test_format_and_parse(self):
        matrix = random_invertible(7, seed=3)
        assert parse_matrix(format_matrix(matrix)) == matrix
        assert format_matrix(BinMatrix.from_rows(["10", "01"])) == "10\n01"

    @parameterized.expand(
        [
            ("102\n010\n", "line 1"),
            ("10\n010\n", "line 2"),
            ("# nothing\n", "no matrix rows"),
        ]
    )
    def test_parse_errors(self, text, message):
        with self.assertRaises(MatrixParseError) as context:
            parse_matrix(text)
        assert message in str(context.exception)
