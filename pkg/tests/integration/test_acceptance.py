#!/usr/bin/env python3
# Copyright 2022 Canonical Ltd.
# See LICENSE file for licensing details.
import itertools
import logging
from collections import deque

import numpy as np
import pytest
from ccdepth.v0.bounds import clifford_count, count_invertible, exhaustive_min_depth
from ccdepth.v0.circuit import (
    H,
    S,
    CliffordTableau,
    Cnot,
    SingleQubit,
    depth,
    to_linear_matrix,
    to_tableau,
    validate_layer,
)
from ccdepth.v0.cliffsynth import (
    decompose_clifford,
    random_clifford_tableau,
    recompose,
    synth_clifford,
)
from ccdepth.v0.gf2 import BinMatrix, direct_sum, is_invertible, random_invertible
from ccdepth.v0.linsynth import commutator_decompose, is_commutator, synth_linear
from ccdepth.v0.prefixsynth import prefix_matrix, synth_P_plus_P, synth_prefix

from tests.integration.helpers import prefix_size_ratio

logger = logging.getLogger(__name__)


def layers_are_valid(circuit) -> bool:
    return all(validate_layer(layer) for layer in circuit.layers)


@pytest.mark.parametrize("n", [6, 14, 30, 62, 126, 254])
def test_prefix_sum_in_depth_16(n):
    circuit = synth_prefix(n)
    assert depth(circuit) <= 16
    assert layers_are_valid(circuit)
    assert to_tableau(circuit) == CliffordTableau.from_linear(prefix_matrix(n))


@pytest.mark.parametrize("n", [7, 15, 31])
def test_odd_prefix_sum_in_depth_17(n):
    circuit = synth_prefix(n)
    assert depth(circuit) <= 17
    assert to_tableau(circuit) == CliffordTableau.from_linear(prefix_matrix(n))


@pytest.mark.parametrize("k", range(5, 9))
def test_prefix_size_stays_n_log_n(k, prefix_baseline):
    ratio = prefix_size_ratio((1 << k) - 2)
    logger.info("size ratio at k=%d: %.4f (baseline %.4f)", k, ratio, prefix_baseline)
    assert ratio <= 1.25 * prefix_baseline


@pytest.mark.slow
@pytest.mark.parametrize("k", [9, 10])
def test_prefix_size_stays_n_log_n_on_wide_registers(k, prefix_baseline):
    n = (1 << k) - 2
    circuit = synth_prefix(n)
    assert depth(circuit) <= 16
    assert prefix_size_ratio(n) <= 1.25 * prefix_baseline


@pytest.mark.parametrize("k", range(2, 9))
def test_p_plus_p_in_depth_15(k):
    n = (1 << k) - 1
    circuit = synth_P_plus_P(n)
    assert depth(circuit) <= 15
    assert layers_are_valid(circuit)
    gates = {type(gate) for layer in circuit.layers for gate in layer}
    assert gates <= {Cnot, SingleQubit}
    assert all(
        gate.op == H for layer in circuit.layers for gate in layer if type(gate) is SingleQubit
    )
    expected = direct_sum(prefix_matrix(n), prefix_matrix(n))
    assert to_tableau(circuit) == CliffordTableau.from_linear(expected)


@pytest.mark.parametrize("n", [6, 8, 10, 20])
def test_linear_maps_in_depth_11(n):
    for seed in range(3):
        matrix = random_invertible(n, seed=seed)
        circuit = synth_linear(matrix, seed=seed)
        assert depth(circuit) <= 11, (n, seed)
        assert layers_are_valid(circuit)
        assert to_linear_matrix(circuit) == matrix


def test_every_element_of_gl3_is_a_commutator():
    count = 0
    for bits in itertools.product((0, 1), repeat=9):
        matrix = BinMatrix.from_array(np.array(bits, dtype=np.uint8).reshape(3, 3))
        if not is_invertible(matrix):
            continue
        count += 1
        assert is_commutator(commutator_decompose(matrix), matrix), matrix
    assert count == count_invertible(3)


@pytest.mark.parametrize("n", [3, 4, 5, 8, 16])
def test_random_commutators(n):
    for seed in range(10):
        target = random_invertible(n, seed=1000 + seed)
        assert is_commutator(commutator_decompose(target, seed=seed), target), (n, seed)


def test_linear_route_to_prefix_sum():
    circuit = synth_linear(prefix_matrix(8))
    assert depth(circuit) <= 11
    assert to_linear_matrix(circuit) == prefix_matrix(8)


@pytest.mark.slow
@pytest.mark.parametrize("n", [6, 8, 10, 20, 40, 64])
def test_linear_sweep(n):
    for seed in range(200):
        matrix = random_invertible(n, seed=500 + seed)
        circuit = synth_linear(matrix, seed=seed)
        assert depth(circuit) <= 11, (n, seed)
        assert layers_are_valid(circuit), (n, seed)
        assert to_linear_matrix(circuit) == matrix


@pytest.mark.slow
@pytest.mark.parametrize("n", [8, 16, 24, 32])
def test_commutator_sweep(n):
    for seed in range(50):
        target = random_invertible(n, seed=5000 + seed)
        assert is_commutator(commutator_decompose(target, seed=seed), target), (n, seed)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_clifford_in_depth_16(n):
    for seed in range(3):
        tableau = random_clifford_tableau(n, seed=seed)
        circuit = synth_clifford(tableau, seed=seed)
        assert depth(circuit) <= 16, (n, seed)
        assert layers_are_valid(circuit)
        assert to_tableau(circuit) == tableau


@pytest.mark.slow
@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_clifford_sweep(n):
    for seed in range(10, 110):
        tableau = random_clifford_tableau(n, seed=seed)
        circuit = synth_clifford(tableau, seed=seed)
        assert depth(circuit) <= 16, (n, seed)
        assert layers_are_valid(circuit), (n, seed)
        assert circuit.width == n
        assert to_tableau(circuit) == tableau


@pytest.mark.parametrize("n", range(2, 11))
def test_six_layer_recomposition(n):
    for seed in range(5):
        tableau = random_clifford_tableau(n, seed=100 + seed)
        assert recompose(decompose_clifford(tableau)) == tableau


@pytest.mark.slow
@pytest.mark.parametrize("n", range(2, 11))
def test_six_layer_recomposition_sweep(n):
    for seed in range(100):
        tableau = random_clifford_tableau(n, seed=1000 + seed)
        assert recompose(decompose_clifford(tableau)) == tableau, (n, seed)


@pytest.mark.slow
def test_minimum_depths_over_gl4():
    histogram = exhaustive_min_depth(4)
    logger.info("GL(4, 2) minimum depth histogram: %s", histogram)
    assert sum(histogram.values()) == 20160
    assert histogram[0] == 1


@pytest.mark.slow
def test_two_qubit_clifford_group_order():
    generators = [
        [SingleQubit(0, H)],
        [SingleQubit(1, H)],
        [SingleQubit(0, S)],
        [SingleQubit(1, S)],
        [Cnot(0, 1)],
        [Cnot(1, 0)],
    ]
    start = CliffordTableau.identity(2)
    seen = {start}
    queue = deque([start])
    while queue:
        tableau = queue.popleft()
        for gates in generators:
            image = tableau.then_gates(gates)
            if image not in seen:
                seen.add(image)
                queue.append(image)
    assert len(seen) == clifford_count(2) == 11520
    drawn = {random_clifford_tableau(2, seed=seed) for seed in range(150000)}
    assert drawn == seen
