# Copyright 2022 Canonical Ltd.
# See LICENSE file for licensing details.

import unittest

from ccdepth.v0.circuit import (
    H,
    CliffordTableau,
    Cnot,
    LayeredCircuit,
    SingleQubit,
    depth,
    to_linear_matrix,
    to_tableau,
    validate_layer,
)
from ccdepth.v0.gf2 import (
    BinMatrix,
    SingularMatrixError,
    anti_transpose,
    block,
    direct_sum,
    inverse,
    random_invertible,
    weight,
    zeros,
)
from ccdepth.v0.prefixsynth import (
    FORWARD,
    REVERSED,
    build_L_matrix,
    build_Linv_matrix,
    build_R_matrix,
    compare_prefix_constructions,
    gadget_M_Minv,
    is_lr_pair,
    ladner_fischer,
    lr_pair,
    prefix_matrix,
    pruned_lf,
    staircase_circuit,
    symmetric_prune,
    synth_P_plus_P,
    synth_prefix,
    weight_recurrences,
)
from parameterized import parameterized

L15_ROWS = [
    "100000000000000",
    "110000000000000",
    "001000000000000",
    "111100000000000",
    "000010000000000",
    "000011000000000",
    "000000100000000",
    "111111110000000",
    "000000001000000",
    "000000001100000",
    "000000000010000",
    "000000001111000",
    "000000000000100",
    "000000000000110",
    "000000000000001",
]

L15_INVERSE_ROWS = [
    "100000000000000",
    "110000000000000",
    "001000000000000",
    "011100000000000",
    "000010000000000",
    "000011000000000",
    "000000100000000",
    "000101110000000",
    "000000001000000",
    "000000001100000",
    "000000000010000",
    "000000000111000",
    "000000000000100",
    "000000000000110",
    "000000000000001",
]


def layers_are_valid(circuit: LayeredCircuit) -> bool:
    return all(validate_layer(layer) for layer in circuit.layers)


class TestBaselines(unittest.TestCase):
    def test_prefix_matrix(self):
        assert prefix_matrix(3) == BinMatrix.from_rows(["100", "110", "111"])
        with self.assertRaises(ValueError):
            prefix_matrix(0)

    def test_staircase(self):
        circuit = staircase_circuit(5)
        assert depth(circuit) == 4
        assert to_linear_matrix(circuit) == prefix_matrix(5)
        with self.assertRaises(ValueError):
            staircase_circuit(1)

    def test_ladner_fischer_on_four_wires(self):
        circuit = ladner_fischer(4)
        assert circuit.layers == (
            (Cnot(0, 1), Cnot(2, 3)),
            (Cnot(1, 3),),
            (Cnot(1, 2),),
        )

    @parameterized.expand([(2,), (4,), (8,), (16,), (64,)])
    def test_ladner_fischer(self, n):
        circuit = ladner_fischer(n)
        assert to_linear_matrix(circuit) == prefix_matrix(n)
        assert depth(circuit) == 2 * (n.bit_length() - 1) - 1
        assert layers_are_valid(circuit)

    def test_ladner_fischer_needs_power_of_two(self):
        with self.assertRaises(ValueError):
            ladner_fischer(6)


class TestLRPairs(unittest.TestCase):
    def test_smallest_pair(self):
        pair = pruned_lf(3)
        assert pair.L_circuit.layers == ((Cnot(0, 1),),)
        assert pair.R_circuit.layers == ((Cnot(1, 2),),)
        assert pair.L_matrix == BinMatrix.from_rows(["100", "110", "001"])

    @parameterized.expand([(3,), (7,), (15,), (31,), (63,)])
    def test_pruned_ladner_fischer(self, n):
        pair = pruned_lf(n)
        assert is_lr_pair(pair)
        assert pair.L_matrix == build_L_matrix(n)
        assert pair.R_matrix == build_R_matrix(n)
        assert inverse(pair.L_matrix) == build_Linv_matrix(n)

    def test_width_15_matrices(self):
        expected = BinMatrix.from_rows(L15_ROWS)
        expected_inverse = BinMatrix.from_rows(L15_INVERSE_ROWS)
        assert weight(expected) == 32
        assert build_L_matrix(15) == expected
        assert build_Linv_matrix(15) == expected_inverse
        assert pruned_lf(15).L_matrix == expected
        assert inverse(expected) == expected_inverse
        assert build_R_matrix(15) == anti_transpose(expected)

    def test_pruned_needs_mersenne_width(self):
        with self.assertRaises(ValueError):
            pruned_lf(5)

    def test_symmetric_pruning_keeps_prefix_sum(self):
        for k in range(2, 6):
            full = pruned_lf((1 << k) - 1)
            for t in range((full.n + 1) // 2):
                pair = symmetric_prune(full, t)
                assert pair.n == full.n - 2 * t
                assert is_lr_pair(pair), (k, t)
                assert to_linear_matrix(pair.L_circuit) == pair.L_matrix
                assert to_linear_matrix(pair.R_circuit) == pair.R_matrix
                product = to_linear_matrix(
                    LayeredCircuit(pair.n, pair.L_circuit.layers + pair.R_circuit.layers)
                )
                assert product == prefix_matrix(pair.n)

    def test_symmetric_prune_errors(self):
        with self.assertRaises(ValueError):
            symmetric_prune(pruned_lf(7), 4)
        with self.assertRaises(ValueError):
            symmetric_prune(pruned_lf(7), -1)

    @parameterized.expand([(1,), (5,), (9,), (21,), (33,)])
    def test_lr_pair_for_odd_widths(self, n):
        pair = lr_pair(n)
        assert pair.n == n
        assert is_lr_pair(pair)
        assert pair.R_matrix == anti_transpose(pair.L_matrix)

    def test_lr_pair_rejects_even_widths(self):
        with self.assertRaises(ValueError):
            lr_pair(6)

    def test_weight_recurrences(self):
        rows = weight_recurrences(7)
        assert [row.n for row in rows] == [1, 3, 7, 15, 31, 63, 127]
        assert rows[1].weight_L == 4 and rows[1].weight_Linv == 4
        assert all(row.weight_L == row.expected_L for row in rows)
        with self.assertRaises(ValueError):
            weight_recurrences(0)


class TestGadget(unittest.TestCase):
    @parameterized.expand([(seed,) for seed in range(5)])
    def test_forward_gadget(self, seed):
        matrix = random_invertible(4, seed=seed)
        layers = gadget_M_Minv(matrix, FORWARD)
        assert len(layers) == 3
        assert all(validate_layer(layer) for layer in layers)
        computed = to_linear_matrix(LayeredCircuit(8, tuple(layers)))
        # registers come out swapped
        assert computed == block([[zeros(4, 4), inverse(matrix)], [matrix, zeros(4, 4)]])

    @parameterized.expand([(seed,) for seed in range(5)])
    def test_reversed_gadget(self, seed):
        matrix = random_invertible(4, seed=seed)
        computed = to_linear_matrix(LayeredCircuit(8, tuple(gadget_M_Minv(matrix, REVERSED))))
        assert computed == block([[zeros(4, 4), matrix], [inverse(matrix), zeros(4, 4)]])

    def test_custom_registers(self):
        matrix = BinMatrix.from_rows(["11", "01"])
        layers = gadget_M_Minv(matrix, FORWARD, ([3, 1], [0, 2]))
        assert {gate.control for gate in layers[0]} <= {3, 1}
        assert {gate.target for gate in layers[0]} <= {0, 2}

    def test_gadget_errors(self):
        with self.assertRaises(SingularMatrixError):
            gadget_M_Minv(BinMatrix.from_rows(["11", "11"]))
        with self.assertRaises(ValueError):
            gadget_M_Minv(BinMatrix.identity(2), "sideways")


class TestConstantDepth(unittest.TestCase):
    @parameterized.expand([(3,), (5,), (7,), (9,), (15,), (31,)])
    def test_p_plus_p(self, n):
        circuit = synth_P_plus_P(n)
        assert circuit.width == 2 * n
        assert depth(circuit) <= 15
        assert layers_are_valid(circuit)
        expected = direct_sum(prefix_matrix(n), prefix_matrix(n))
        assert to_tableau(circuit) == CliffordTableau.from_linear(expected)
        gates = [gate for layer in circuit.layers for gate in layer]
        assert all(type(gate) is Cnot or gate == SingleQubit(gate.qubit, H) for gate in gates)

    @parameterized.expand([(1,), (4,)])
    def test_p_plus_p_rejects_width(self, n):
        with self.assertRaises(ValueError):
            synth_P_plus_P(n)

    def test_prefix_for_every_small_width(self):
        for n in range(2, 41):
            circuit = synth_prefix(n)
            assert circuit.width == n
            assert depth(circuit) <= (17 if n % 2 else 16), n
            assert layers_are_valid(circuit), n
            assert to_tableau(circuit) == CliffordTableau.from_linear(prefix_matrix(n)), n

    def test_small_widths_use_the_staircase(self):
        assert synth_prefix(4) == staircase_circuit(4)

    def test_prefix_rejects_single_qubit(self):
        with self.assertRaises(ValueError):
            synth_prefix(1)

    def test_compare_constructions(self):
        rows = {row.construction: row for row in compare_prefix_constructions(16)}
        assert set(rows) == {"staircase", "ladner-fischer", "commutative"}
        assert rows["staircase"].commutative_depth == 15
        assert rows["ladner-fischer"].commutative_depth == 7
        assert rows["commutative"].commutative_depth <= 16
        small = compare_prefix_constructions(6)
        assert "ladner-fischer" not in {row.construction for row in small}
