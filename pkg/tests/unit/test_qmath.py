# test_qmath.py
"""
Unit tests for state vectors, tensor products and Bell-basis expansions.
"""
import math

import numpy as np
import pytest

from src.analytic import HONEST_PAIRING, honest_state_qudit
from src.qmath import (
    BellIndex,
    PureState,
    bell_basis_matrix,
    bell_state,
    from_bell_coefficients,
    ghz_state,
    joint_bell_coefficients,
    joint_bell_coefficients_6,
    single_site,
    tensor,
)


@pytest.mark.unit
class TestPureState:

    def test_basis_state_index_is_site_major(self):
        """|1 0 1> of qubits sits at index 5"""
        state = PureState.basis(2, [1, 0, 1])
        assert state.amplitudes[5] == 1.0
        assert state.num_sites == 3

    def test_from_amplitudes_normalizes(self):
        state = PureState.from_amplitudes(2, [3, 4])
        assert np.allclose(state.amplitudes, [0.6, 0.8])

    def test_unnormalized_vector_rejected(self):
        with pytest.raises(ValueError, match="not normalized"):
            PureState(2, 1, np.array([1.0, 1.0]))

    @pytest.mark.parametrize("length", [3, 6, 1])
    def test_length_not_a_power_rejected(self, length):
        with pytest.raises(ValueError):
            PureState.from_amplitudes(2, np.ones(length))

    def test_dimension_below_two_rejected(self):
        with pytest.raises(ValueError, match="dim_per_site"):
            PureState(1, 1, np.array([1.0]))

    def test_amplitudes_are_read_only(self):
        state = PureState.basis(2, [0])
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.5

    def test_zero_vector_cannot_be_normalized(self):
        with pytest.raises(ValueError, match="zero vector"):
            PureState.from_amplitudes(2, [0, 0])


@pytest.mark.unit
class TestBellStates:

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_bell_basis_is_orthonormal(self, d):
        matrix = bell_basis_matrix(d)
        assert np.allclose(matrix.conj() @ matrix.T, np.eye(d * d), atol=1e-12)

    def test_qubit_phi_plus(self):
        """Φ_00 = (|00> + |11>)/sqrt 2"""
        state = bell_state(2, BellIndex(0, 0))
        assert np.allclose(state.amplitudes, np.array([1, 0, 0, 1]) / math.sqrt(2))

    def test_qubit_phase_flip(self):
        """Φ_01 = (|00> - |11>)/sqrt 2"""
        state = bell_state(2, BellIndex(0, 1))
        assert np.allclose(state.amplitudes, np.array([1, 0, 0, -1]) / math.sqrt(2))

    def test_qubit_shift(self):
        """Φ_10 = (|01> + |10>)/sqrt 2"""
        state = bell_state(2, BellIndex(1, 0))
        assert np.allclose(state.amplitudes, np.array([0, 1, 1, 0]) / math.sqrt(2))

    def test_index_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            bell_state(3, BellIndex(3, 0))

    def test_reduce_wraps_indices(self):
        assert BellIndex.reduce(4, -1, 3) == BellIndex(1, 2)

    def test_ghz_three_qubits(self):
        state = ghz_state(2, 3)
        expected = np.zeros(8)
        expected[[0, 7]] = 1 / math.sqrt(2)
        assert np.allclose(state.amplitudes, expected)


@pytest.mark.unit
class TestTensor:

    def test_kron_order(self):
        state = tensor([PureState.basis(2, [1]), PureState.basis(2, [0])])
        assert state.amplitudes[2] == 1.0

    def test_mismatched_dimensions_rejected(self):
        with pytest.raises(ValueError, match="dim_per_site"):
            tensor([PureState.basis(2, [0]), PureState.basis(3, [0])])

    def test_empty_product_rejected(self):
        with pytest.raises(ValueError):
            tensor([])


@pytest.mark.unit
class TestBellExpansion:

    def test_bell_product_expands_to_single_entry(self):
        """Φ_10 on (0,1) and Φ_11 on (2,3) gives V_1011 = 1"""
        state = tensor([bell_state(2, BellIndex(1, 0)), bell_state(2, BellIndex(1, 1))])
        table = joint_bell_coefficients(state, ((0, 1), (2, 3)))
        assert abs(table["1011"] - 1.0) < 1e-12
        assert np.isclose(np.sum(np.abs(table.values) ** 2), 1.0)

    def test_swapped_pairing_reorders_entries(self):
        state = tensor([bell_state(2, BellIndex(1, 0)), bell_state(2, BellIndex(1, 1))])
        table = joint_bell_coefficients(state, ((2, 3), (0, 1)))
        assert abs(table["1110"] - 1.0) < 1e-12

    @pytest.mark.parametrize("pairing", [((0, 1), (1, 2)), ((0, 1),), ((0, 4), (1, 2))])
    def test_invalid_pairings_rejected(self, pairing):
        state = PureState.basis(2, [0, 0, 0, 0])
        with pytest.raises(ValueError, match="pairing"):
            joint_bell_coefficients(state, pairing)

    def test_wrong_site_count_rejected(self):
        with pytest.raises(ValueError, match="4-site"):
            joint_bell_coefficients(PureState.basis(2, [0, 0, 0]), ((0, 1), (2, 3)))

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_expansion_round_trip(self, d, qudit_factory):
        """Expanding and re-summing the Bell products returns the state"""
        state = honest_state_qudit(qudit_factory.create(d), qudit_factory.create(d), d)
        table = joint_bell_coefficients(state, HONEST_PAIRING)
        rebuilt = from_bell_coefficients(table, HONEST_PAIRING)
        assert rebuilt.max_abs_diff(state) < 1e-12

    def test_six_site_expansion_round_trip(self):
        state = tensor([single_site(2, [0.6, 0.8j]), ghz_state(2, 3), single_site(2, [1, 1]), single_site(2, [1, 0])])
        pairing = ((0, 3), (1, 4), (2, 5))
        table = joint_bell_coefficients_6(state, pairing)
        assert table.arity == 3
        assert from_bell_coefficients(table, pairing).max_abs_diff(state) < 1e-12
