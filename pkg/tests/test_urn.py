"""Tests for the gap urn and its coupling with tree growth."""

import numpy as np
import pytest

from mstree.core.spectra import principal_eigenvector
from mstree.core.tree import build_from_permutation, gap_profile, insert
from mstree.core.urn import (
    GapIndexError,
    TenabilityError,
    UrnState,
    coupled_growth,
    coupled_insert_delta,
    draw_and_replace,
    initial_state,
    replacement_matrix,
    simulate,
)


class TestReplacementMatrix:
    def test_binary_boundary(self):
        assert replacement_matrix(2).rows == ((-1, 2), (1, 0))

    def test_ternary(self):
        assert replacement_matrix(3).rows == (
            (-1, 0, 0, 2),
            (1, -2, 0, 2),
            (0, 2, -3, 2),
            (0, 0, 3, -2),
        )

    def test_quaternary(self):
        assert replacement_matrix(4).rows == (
            (-1, 0, 0, 0, 2, 0),
            (1, -2, 0, 0, 2, 0),
            (0, 2, -3, 0, 2, 0),
            (0, 0, 3, -4, 2, 0),
            (0, 0, 0, 0, -2, 3),
            (0, 0, 0, 4, 0, -3),
        )

    @pytest.mark.parametrize("m", range(2, 30))
    def test_rows_add_one_ball(self, m):
        matrix = replacement_matrix(m).as_array()
        assert matrix.shape == (2 * m - 2, 2 * m - 2)
        assert (matrix.sum(axis=1) == 1).all()

    @pytest.mark.parametrize("m", range(2, 30))
    def test_only_diagonal_is_negative(self, m):
        matrix = replacement_matrix(m).as_array()
        off_diagonal = matrix - np.diag(np.diag(matrix))
        assert (off_diagonal >= 0).all()


class TestUrnState:
    def test_initial_state(self):
        assert initial_state(2).counts == (0, 2)
        assert initial_state(4).counts == (0, 0, 0, 0, 2, 0)

    def test_draw_applies_row(self):
        matrix = replacement_matrix(4)
        state = draw_and_replace(initial_state(4), matrix, 5)
        assert state.counts == (0, 0, 0, 0, 0, 3)
        assert state.drawn == 1
        assert state.total == 3

    def test_absent_color_raises(self):
        with pytest.raises(TenabilityError):
            draw_and_replace(initial_state(4), replacement_matrix(4), 1)

    def test_color_out_of_range_raises(self):
        with pytest.raises(TenabilityError):
            draw_and_replace(initial_state(3), replacement_matrix(3), 5)

    def test_negative_count_raises(self):
        state = UrnState(counts=(0, 1, 0, 0))
        with pytest.raises(TenabilityError):
            draw_and_replace(state, replacement_matrix(3), 2)

    def test_simulate_total_grows_by_one(self):
        state = simulate(5, 1000, seed=3)
        assert state.total == 1002
        assert state.drawn == 1000
        assert abs(sum(state.fractions) - 1.0) < 1e-12

    def test_simulate_is_deterministic(self):
        assert simulate(6, 500, seed=9) == simulate(6, 500, seed=9)

    def test_simulate_zero_steps(self):
        assert simulate(3, 0, seed=1) == initial_state(3)

    @pytest.mark.slow
    def test_simulate_converges_to_principal_vector(self):
        state = simulate(4, 100_000, seed=1)
        target = principal_eigenvector(4).v
        assert max(abs(a - b) for a, b in zip(state.fractions, target)) < 0.02


class TestCoupledInsertDelta:
    def test_partial_leaf_gap(self, figure_one_tree):
        color, delta = coupled_insert_delta(figure_one_tree, 8)
        assert color == 5
        assert delta == (0, 0, 0, 0, -2, 3)

    def test_internal_gap(self, figure_one_tree):
        color, delta = coupled_insert_delta(figure_one_tree, 11)
        assert color == 2
        assert delta == (1, -2, 0, 0, 2, 0)

    def test_extreme_gaps(self, figure_one_tree):
        assert coupled_insert_delta(figure_one_tree, 0)[0] == 6
        assert coupled_insert_delta(figure_one_tree, 16)[0] == 2

    def test_delta_matches_matrix_row(self, figure_one_tree):
        matrix = replacement_matrix(4)
        for gap in range(17):
            color, delta = coupled_insert_delta(figure_one_tree, gap)
            assert delta == matrix.row(color)

    def test_gap_out_of_range(self, figure_one_tree):
        with pytest.raises(GapIndexError):
            coupled_insert_delta(figure_one_tree, 17)

    def test_delta_predicts_profile_change(self):
        tree = build_from_permutation(3, [8, 4, 12, 2, 10])
        before = gap_profile(tree).counts
        color, delta = coupled_insert_delta(tree, 2)
        insert(tree, 6)
        assert color == 1
        after = gap_profile(tree).counts
        assert tuple(a - b for a, b in zip(after, before)) == delta


class TestCoupledGrowth:
    @pytest.mark.parametrize("m", [2, 3, 4, 10])
    def test_tree_and_urn_stay_coupled(self, m):
        report = coupled_growth(m, 2500, seed=m)
        assert report.coupled
        assert report.delta_mismatches == 0
        assert report.profile_mismatches == 0
        assert report.final_profile.counts == report.final_state.counts
        assert report.final_state.total == 2502
        assert sum(report.draws_by_color.values()) == 2500

    def test_unverified_run_still_checks_final_profile(self):
        report = coupled_growth(6, 800, seed=1, verify_profiles=False)
        assert report.coupled
