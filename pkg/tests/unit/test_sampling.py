# test_sampling.py
"""
Unit tests for seeded outcome draws, count tables and announcements.
"""
import numpy as np
import pytest

from src.analytic import honest_probabilities
from src.sampling import (
    LOST,
    Announcement,
    CountTable,
    MeasurementRecord,
    announce,
    counts_from_draws,
    derive_seeds,
    draw_mixture,
    draw_outcomes,
    sample_counts,
    to_announcements,
)
from src.tables import ProbabilityTable


@pytest.mark.unit
class TestSeeding:

    def test_derived_seeds_are_stable(self):
        assert derive_seeds(7, 5) == derive_seeds(7, 5)

    def test_prefix_property(self):
        """Asking for more children never changes the earlier ones"""
        assert derive_seeds(7, 8)[:3] == derive_seeds(7, 3)

    def test_children_are_distinct(self):
        seeds = derive_seeds(7, 100)
        assert len(set(seeds)) == 100

    def test_same_seed_same_counts(self, fixture_alice, fixture_bob):
        table = honest_probabilities(fixture_alice, fixture_bob)
        first = sample_counts(table, 1000, 0.8, seed=11)
        second = sample_counts(table, 1000, 0.8, seed=11)
        assert np.array_equal(first.counts, second.counts)
        assert first.n_received == second.n_received


@pytest.mark.unit
class TestDraws:

    def test_counts_add_up(self, fixture_alice, fixture_bob):
        counts = sample_counts(honest_probabilities(fixture_alice, fixture_bob), 500, 0.5, seed=3)
        assert counts.n_sent == 500
        assert int(counts.counts.sum()) == counts.n_received
        assert counts.n_lost == 500 - counts.n_received

    def test_no_loss_receives_everything(self):
        counts = sample_counts(ProbabilityTable.uniform(2), 200, 1.0, seed=3)
        assert counts.n_received == 200

    def test_total_loss_receives_nothing(self):
        draws = draw_outcomes(ProbabilityTable.uniform(2), 50, 0.0, seed=3)
        assert np.all(draws.joint == LOST)
        assert np.all(draws.alice_outcomes == LOST)

    def test_zero_pairs(self):
        counts = sample_counts(ProbabilityTable.uniform(2), 0, 1.0, seed=3)
        assert counts.n_sent == 0 and counts.n_received == 0

    def test_point_mass_table(self):
        flat = np.zeros(16)
        flat[0b1011] = 1.0
        counts = sample_counts(ProbabilityTable.from_flat(flat), 100, 1.0, seed=3)
        assert counts["1011"] == 100

    def test_unnormalized_table_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            draw_outcomes(ProbabilityTable.from_flat(np.full(16, 1 / 32)), 10, 1.0, seed=1)

    @pytest.mark.parametrize("n,eta", [(-1, 1.0), (10, 1.5), (10, -0.1)])
    def test_bad_arguments_rejected(self, n, eta):
        with pytest.raises(ValueError):
            draw_outcomes(ProbabilityTable.uniform(2), n, eta, seed=1)

    def test_mixture_weights_validated(self):
        with pytest.raises(ValueError, match="weights"):
            draw_mixture([ProbabilityTable.uniform(2)], [0.5, 0.5], 10, 1.0, seed=1)

    def test_mixture_component_share(self):
        draws = draw_mixture(
            [ProbabilityTable.uniform(2), ProbabilityTable.uniform(2)], [0.7, 0.3], 20000, 1.0, seed=5
        )
        share = float(np.mean(draws.component == 1))
        # sd of the share is about 0.0032
        assert abs(share - 0.3) < 0.02

    def test_frequencies_converge_at_a_million_pairs(self, fixture_alice, fixture_bob):
        table = honest_probabilities(fixture_alice, fixture_bob)
        counts = sample_counts(table, 10 ** 6, 1.0, seed=13)
        # every frequency has sd below 5e-4
        assert np.max(np.abs(counts.frequencies().reshape(-1) - table.flat())) < 5e-3


@pytest.mark.unit
class TestCountTable:

    def test_inconsistent_tallies_rejected(self):
        with pytest.raises(ValueError, match="inconsistent"):
            CountTable(np.ones(16, dtype=int), n_sent=10, n_received=16)

    def test_party_tallies(self):
        counts = np.zeros(16, dtype=int)
        counts[0b1010] = 4
        counts[0b0011] = 6
        table = CountTable(counts, n_sent=12, n_received=10)
        assert table.alice_conclusive == 4
        assert table.bob_conclusive == 10
        assert table.alice_inconclusive == 6
        assert table.conclusive_counts() == (4, 0, 0, 0)


@pytest.mark.unit
class TestAnnouncements:

    def test_announce_maps_outcomes(self):
        outcomes = np.array([0, 1, 2, 3, LOST])
        announced = announce(outcomes)
        assert list(announced) == [0, 0, 2, 3, -1]

    def test_record_counts_match_count_table(self, fixture_alice, fixture_bob):
        draws = draw_outcomes(honest_probabilities(fixture_alice, fixture_bob), 2000, 0.7, seed=21)
        record = to_announcements(draws)
        counts = counts_from_draws(draws)
        assert record.joint_conclusive_counts() == counts.conclusive_counts()
        assert record.n_announced == counts.n_received

    def test_pairs_yield_announcements(self):
        record = MeasurementRecord(np.array([2, 0], dtype=np.int8), np.array([3, -1], dtype=np.int8))
        assert list(record.pairs()) == [
            (Announcement.PHI_10, Announcement.PHI_11),
            (Announcement.INCONCLUSIVE, Announcement.LOST),
        ]

    def test_lengths_must_match(self):
        with pytest.raises(ValueError):
            MeasurementRecord(np.array([0, 0]), np.array([0]))
