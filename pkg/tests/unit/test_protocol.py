# test_protocol.py
"""
Unit tests for the group checks, the party state machine and session assembly.
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.analytic import PreparationParams, conclusive_probabilities
from src.estimator import accuracy_halfwidth, recover_partner
from src.protocol import (
    Alice,
    Bob,
    PartyPhase,
    ProtocolConfig,
    PublicTranscript,
    accuracy_check,
    comparison_positions,
    digit_comparison,
    draw_group_params,
    eavesdrop_check,
    pair_threshold,
    phi_degeneracy_check,
    reliable_theta_digits,
    run_group,
    run_session,
)
from src.sampling import make_rng
from src.tables import ConclusiveQuadruple


@pytest.mark.unit
class TestChecks:

    def test_accuracy_passes_on_symmetric_quadruple(self):
        verdict = accuracy_check(ConclusiveQuadruple(0.07, 0.02, 0.02, 0.07), threshold=0.01)
        assert verdict.passed
        assert verdict.value == 0.0

    def test_accuracy_fails_on_skew(self):
        verdict = accuracy_check(ConclusiveQuadruple(0.09, 0.02, 0.02, 0.05), threshold=0.01)
        assert not verdict.passed
        assert verdict.value == pytest.approx(0.04)

    def test_accuracy_default_threshold_per_pair(self):
        quadruple = ConclusiveQuadruple(9 / 128, 3 / 128, 3 / 128, 9 / 128)
        verdict = accuracy_check(quadruple, n=100)
        assert verdict.passed
        assert verdict.threshold in (pair_threshold(100, 9 / 128, 9 / 128), pair_threshold(100, 3 / 128, 3 / 128))

    def test_accuracy_fails_on_gap_of_two_tenths(self):
        verdict = accuracy_check(ConclusiveQuadruple(0.3, 0.05, 0.05, 0.1), n=100)
        assert not verdict.passed
        assert verdict.value == pytest.approx(0.2)
        assert verdict.threshold == pytest.approx(2 * accuracy_halfwidth(100, 0.4))

    def test_accuracy_reports_the_failing_pair(self):
        # the 0.04 gap sits inside the large pair's band (~0.043), the 0.03 gap outside the small pair's (~0.015)
        quadruple = ConclusiveQuadruple(0.20, 0.03, 0.0, 0.16)
        verdict = accuracy_check(quadruple, n=1000)
        assert not verdict.passed
        assert verdict.value == pytest.approx(0.03)
        assert verdict.threshold == pytest.approx(pair_threshold(1000, 0.03, 0.0))

    def test_accuracy_needs_threshold_or_count(self):
        with pytest.raises(ValueError, match="threshold"):
            accuracy_check(ConclusiveQuadruple(0.1, 0.1, 0.1, 0.1))

    def test_pair_threshold_grows_with_pair_probability(self):
        assert pair_threshold(100, 3 / 128, 3 / 128) < pair_threshold(100, 9 / 128, 9 / 128)
        assert pair_threshold(100, 9 / 128, 9 / 128) == pytest.approx(2 * accuracy_halfwidth(100, 18 / 128))

    def test_eavesdrop_fails_on_uniform(self):
        verdict = eavesdrop_check(ConclusiveQuadruple(*(1 / 16,) * 4), threshold=0.01)
        assert not verdict.passed
        assert verdict.detail

    def test_eavesdrop_zero_threshold_never_fails(self):
        assert eavesdrop_check(ConclusiveQuadruple(*(1 / 16,) * 4), threshold=0.0).passed

    @pytest.mark.parametrize("cos_sum,passed", [(0.5, True), (-0.5, True), (0.1, False), (0.0, False)])
    def test_phi_degeneracy(self, cos_sum, passed):
        assert phi_degeneracy_check(cos_sum, 0.2).passed is passed


@pytest.mark.unit
class TestDigitComparison:

    def test_positions_sorted_and_distinct(self):
        positions = comparison_positions(8, 3, position_seed=5)
        assert positions == sorted(set(positions))
        assert len(positions) == 3
        assert all(0 <= p < 8 for p in positions)

    def test_positions_follow_seed(self):
        assert comparison_positions(8, 3, 5) == comparison_positions(8, 3, 5)

    def test_too_many_positions_rejected(self):
        with pytest.raises(ValueError, match="cannot compare"):
            comparison_positions(4, 5, 1)

    def test_mismatch_reported(self):
        comparison = digit_comparison("1234", "1294", 4, position_seed=1)
        assert not comparison.passed
        assert comparison.mismatches == [2]

    def test_equal_views_pass(self):
        assert digit_comparison("8858", "8858", 2, position_seed=1).passed

    def test_view_lengths_must_match(self):
        with pytest.raises(ValueError):
            digit_comparison("123", "1234", 1, position_seed=1)


@pytest.mark.unit
class TestParty:

    def test_recover_before_estimate_rejected(self, fixture_alice):
        with pytest.raises(RuntimeError, match="cannot move"):
            Alice(fixture_alice, 1).recover()

    def test_announce_only_once(self, fixture_alice):
        party = Alice(fixture_alice, 1)
        party.announce(np.array([2, 0]))
        with pytest.raises(RuntimeError):
            party.announce(np.array([2, 0]))

    def test_view_needs_recovery(self, fixture_bob):
        with pytest.raises(RuntimeError, match="recovered"):
            Bob(fixture_bob, 1).view()

    def test_exact_transcript_round_trip(self, fixture_alice, fixture_bob):
        transcript = PublicTranscript(exact=ConclusiveQuadruple(9 / 128, 3 / 128, 3 / 128, 9 / 128))
        alice, bob = Alice(fixture_alice, 1), Bob(fixture_bob, 1)
        for party in (alice, bob):
            party.estimate(transcript)
            party.recover()
        assert alice.phase is PartyPhase.RECOVERED
        assert alice.view() == bob.view() == "8858"


@pytest.mark.unit
class TestProtocolConfig:

    def test_defaults(self):
        cfg = ProtocolConfig()
        assert cfg.group_size == 100
        assert cfg.digits_per_group == 4
        assert cfg.normalization == "n_received"

    def test_sacrificed_digits_must_fit(self):
        with pytest.raises(ValidationError, match="exceeds"):
            ProtocolConfig(digits_per_value=1, digits_sacrificed_per_group=5)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            ProtocolConfig(group_count=10)

    @pytest.mark.parametrize("field,value", [("group_size", 0), ("digits_per_value", 9), ("theta_margin", 0.5)])
    def test_bounds(self, field, value):
        with pytest.raises(ValidationError) as exc_info:
            ProtocolConfig(**{field: value})
        assert field in str(exc_info.value)


@pytest.mark.unit
class TestRunGroup:

    def test_honest_exact_group_keeps_digits(self, fixture_alice, fixture_bob, exact_config):
        result = run_group(fixture_alice, fixture_bob, exact_config(), seed=3)
        assert result.passed
        assert result.alice_view == result.bob_view == "8858"
        assert len(result.kept_digits) == 2
        assert result.alice_kept == result.bob_kept == result.kept_digits

    def test_compared_positions_never_kept(self, fixture_alice, fixture_bob, exact_config):
        result = run_group(fixture_alice, fixture_bob, exact_config(digits_per_value=3), seed=3)
        assert not set(result.comparison.positions) & set(result.kept_positions)
        assert len(result.kept_positions) == 12 - 2

    def test_intercept_is_detected(self, fixture_alice, fixture_bob, attack_factory):
        cfg = ProtocolConfig(exact_probabilities=True, attack=attack_factory.create())
        result = run_group(fixture_alice, fixture_bob, cfg, seed=3)
        assert not result.passed
        assert "eavesdrop_check" in result.reasons
        assert result.kept_digits == ""

    def test_degenerate_phase_sum_discarded(self, exact_config):
        alice = PreparationParams(theta=math.pi / 6, phi=math.pi / 4)
        bob = PreparationParams(theta=math.pi / 3, phi=math.pi / 4)
        result = run_group(alice, bob, exact_config(), seed=3)
        assert "phi_degeneracy_check" in result.reasons

    def test_theta_at_pi4_fails_accuracy(self, fixture_bob, exact_config):
        alice = PreparationParams(theta=math.pi / 4, phi=0.3)
        result = run_group(alice, fixture_bob, exact_config(), seed=3)
        assert result.verdicts["accuracy_check"].detail == "recovered values unreliable"
        assert "accuracy_check" in result.reasons

    def test_total_loss_discards_group(self, fixture_alice, fixture_bob):
        cfg = ProtocolConfig(channel={"fixed_loss_db": 400.0})
        result = run_group(fixture_alice, fixture_bob, cfg, seed=3)
        assert result.n_received == 0
        assert result.reasons == ["no_pairs_received"]

    def test_sampled_group_is_seeded(self, fixture_alice, fixture_bob):
        cfg = ProtocolConfig(group_size=500)
        first = run_group(fixture_alice, fixture_bob, cfg, seed=9)
        second = run_group(fixture_alice, fixture_bob, cfg, seed=9)
        assert first == second

    def test_sent_normalization_shrinks_estimate(self, fixture_alice, fixture_bob):
        lossy = {"fixed_loss_db": 3.0}
        by_received = run_group(fixture_alice, fixture_bob, ProtocolConfig(channel=lossy), seed=9)
        by_sent = run_group(
            fixture_alice, fixture_bob, ProtocolConfig(channel=lossy, normalization="n_sent"), seed=9
        )
        ratio = by_received.n_received / by_received.n_sent
        assert by_sent.quadruple.p1010 == pytest.approx(by_received.quadruple.p1010 * ratio)


@pytest.mark.unit
class TestReliableDigits:

    def test_value_on_digit_boundary_has_none(self, fixture_alice, fixture_bob):
        # Bob's cos theta is 0.5, on the 0.4/0.5 cell edge, at any n
        recovered = recover_partner(fixture_alice, conclusive_probabilities(fixture_alice, fixture_bob))
        assert reliable_theta_digits(fixture_alice, recovered, 10 ** 8, 2) == 0

    def test_digits_follow_pair_count(self, fixture_alice, fixture_bob):
        recovered = recover_partner(fixture_bob, conclusive_probabilities(fixture_alice, fixture_bob))
        assert reliable_theta_digits(fixture_bob, recovered, 100, 2) == 0
        assert reliable_theta_digits(fixture_bob, recovered, 10 ** 8, 2) == 2

    def test_unreliable_recovery_has_none(self, fixture_bob):
        own = PreparationParams(theta=math.pi / 4, phi=0.3)
        recovered = recover_partner(own, conclusive_probabilities(own, fixture_bob))
        assert reliable_theta_digits(own, recovered, 10 ** 8, 2) == 0

    def test_group_reports_both_values(self, fixture_alice, fixture_bob, exact_config):
        cfg = exact_config(group_size=10 ** 8, digits_per_value=2)
        result = run_group(fixture_alice, fixture_bob, cfg, seed=3)
        assert result.reliable_digits == {"cos_theta_a": 2, "cos_theta_b": 0}

    def test_discarded_group_reports_nothing(self, fixture_alice, fixture_bob):
        result = run_group(fixture_alice, fixture_bob, ProtocolConfig(channel={"fixed_loss_db": 400.0}), seed=3)
        assert result.reliable_digits == {}


@pytest.mark.unit
class TestSession:

    def test_group_params_admissible(self):
        rng = make_rng(17)
        for _ in range(200):
            alice, bob = draw_group_params(rng, 0.1, 0.2)
            for params in (alice, bob):
                assert params.is_admissible(0.1)
            assert abs(math.cos(alice.phi + bob.phi)) >= 0.2

    def test_no_groups_gives_empty_report(self, exact_config):
        report = run_session(exact_config(num_groups=0))
        assert report.groups == []
        assert report.final_key == ""
        assert report.efficiency == 0.0

    def test_honest_exact_session(self, exact_config):
        report = run_session(exact_config())
        assert report.groups_passed == 10
        assert report.key_length == 20
        assert report.efficiency == pytest.approx(0.02)
        assert report.alice_key == report.bob_key == report.final_key
        assert report.key_disagreement == 0.0

    def test_session_is_reproducible(self, exact_config):
        cfg = exact_config(exact_probabilities=False, master_seed=99)
        assert run_session(cfg).model_dump() == run_session(cfg).model_dump()

    def test_workers_do_not_change_result(self, exact_config):
        serial = run_session(exact_config(exact_probabilities=False, workers=1))
        threaded = run_session(exact_config(exact_probabilities=False, workers=4))
        assert serial.groups == threaded.groups
        assert serial.final_key == threaded.final_key

    def test_full_intercept_leaves_no_key(self, attack_factory):
        cfg = ProtocolConfig(num_groups=5, attack=attack_factory.create())
        report = run_session(cfg)
        assert report.groups_passed == 0
        assert report.final_key == ""
        assert sum(report.discard_reasons.values()) >= 5
