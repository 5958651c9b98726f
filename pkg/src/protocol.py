"""
The two-party quantum number distribution session.

One group runs five steps: both parties prepare their secret qubit, the
source sends a Φ_00 pair per slot, each party makes a Bell-state measurement
and announces Φ_10/Φ_11 or "inconclusive", both estimate the conclusive
quadruple from the public announcements, and each inverts it for the other
party's (cos theta, cos phi). Four checks decide whether the group's digits
enter the key: accuracy, eavesdrop separation, phase degeneracy and a public
comparison of a few sacrificed digits.

Digit layout of a group (each value contributes D digits):
    [Alice cos theta | Alice cos phi | Bob cos theta | Bob cos phi]
Alice owns the first half, Bob the second. A party's view holds its own
source digits in its half and its recovered digits in the other.
"""
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.adversary import AttackConfig, attacked_probabilities, full_attack_table
from src.analytic import HALF_PI, QUARTER_PI, THETA_MARGIN, PreparationParams, honest_probabilities
from src.channel import ChannelConfig, apply_error_mixture, transmittance
from src.config import DEFAULT_MASTER_SEED
from src.estimator import (
    RecoveredValues,
    accuracy_halfwidth,
    digits_of,
    estimate_from_record,
    propagated_halfwidth,
    recover_partner,
    reliable_digit_count,
)
from src.sampling import MeasurementRecord, announce, derive_seeds, draw_mixture, make_rng
from src.tables import ConclusiveQuadruple

logger = logging.getLogger(__name__)

VALUES_PER_GROUP = 4


class CheckTolerances(BaseModel):
    """Check thresholds; None means 2 x a count half-width at the group's normalizer.

    The accuracy default is taken per pair (pair_threshold), the separation
    default at the mean conclusive probability (default_threshold).
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    accuracy_threshold: Optional[float] = Field(default=None, ge=0.0)
    eavesdrop_separation: Optional[float] = Field(default=None, ge=0.0)
    cos_phi_sum_floor: float = Field(default=0.2, ge=0.0, le=0.9)


class ProtocolConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    group_size: int = Field(default=100, ge=1)
    num_groups: int = Field(default=100, ge=0)
    digits_per_value: int = Field(default=1, ge=1, le=8)
    digits_sacrificed_per_group: int = Field(default=2, ge=0)
    check_tolerances: CheckTolerances = Field(default_factory=CheckTolerances)
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    attack: AttackConfig = Field(default_factory=AttackConfig)
    master_seed: int = Field(default=DEFAULT_MASTER_SEED, ge=0)
    theta_margin: float = Field(default=THETA_MARGIN, gt=0.0, le=0.35)
    exact_probabilities: bool = False
    normalization: Literal["n_received", "n_sent"] = "n_received"
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def sacrificed_fits(self):
        if self.digits_sacrificed_per_group > self.digits_per_group:
            raise ValueError(
                f"digits_sacrificed_per_group ({self.digits_sacrificed_per_group}) exceeds "
                f"the {self.digits_per_group} digits of a group"
            )
        return self

    @property
    def digits_per_group(self) -> int:
        return VALUES_PER_GROUP * self.digits_per_value


class Verdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    value: float
    threshold: float
    detail: Optional[str] = None


class DigitComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    positions: List[int]
    mismatches: List[int]


def default_threshold(n: int, quadruple: ConclusiveQuadruple) -> float:
    """2 x the count half-width at the mean conclusive probability."""
    return 2.0 * accuracy_halfwidth(max(n, 1), min(1.0, max(0.0, quadruple.mean)))


def pair_threshold(n: int, first: float, second: float) -> float:
    """2 x the count half-width of the pair's combined probability.

    The difference of two multinomial counts has variance n(p1 + p2) - n(p1 - p2)^2,
    so the pair's own total sets its spread, not the mean over all four entries.
    """
    return 2.0 * accuracy_halfwidth(max(n, 1), min(1.0, max(0.0, first + second)))


def accuracy_check(
    quadruple: ConclusiveQuadruple, threshold: Optional[float] = None, n: Optional[int] = None
) -> Verdict:
    """Pass iff P_1010 ~ P_1111 and P_1011 ~ P_1110.

    An explicit threshold applies to both pairs; without one each pair gets
    pair_threshold at n. The verdict reports the pair closest to failing.
    """
    pairs = ((quadruple.p1010, quadruple.p1111), (quadruple.p1011, quadruple.p1110))
    if threshold is None:
        if n is None:
            raise ValueError("accuracy_check needs a threshold or the pair count n")
        thresholds = [pair_threshold(n, first, second) for first, second in pairs]
    else:
        thresholds = [threshold, threshold]
    gaps = [abs(first - second) for first, second in pairs]
    gap, limit = max(zip(gaps, thresholds), key=lambda item: item[0] - item[1])
    passed = all(g < t for g, t in zip(gaps, thresholds))
    return Verdict(passed=passed, value=gap, threshold=limit)


def eavesdrop_check(quadruple: ConclusiveQuadruple, threshold: float) -> Verdict:
    """Fail when the symmetric and asymmetric averages are too close to trust."""
    separation = quadruple.separation
    passed = not separation < threshold
    return Verdict(passed=passed, value=separation, threshold=threshold,
                   detail=None if passed else "symmetric and asymmetric entries too close")


def phi_degeneracy_check(cos_phi_sum: float, floor: float) -> Verdict:
    passed = abs(cos_phi_sum) >= floor
    return Verdict(passed=passed, value=abs(cos_phi_sum), threshold=floor,
                   detail=None if passed else "cos(phi_a + phi_b) too close to 0")


def comparison_positions(total: int, num_to_compare: int, position_seed: int) -> List[int]:
    if not 0 <= num_to_compare <= total:
        raise ValueError(f"cannot compare {num_to_compare} of {total} digits")
    chosen = make_rng(position_seed).choice(total, size=num_to_compare, replace=False)
    return sorted(int(p) for p in chosen)


def digit_comparison(alice_digits: str, bob_digits: str, num_to_compare: int, position_seed: int) -> DigitComparison:
    """Publicly compare digits at seed-chosen positions of the two views.

    At a position in Alice's half, Alice's view holds her source digit and
    Bob's his recovered one, and the other way round in Bob's half.
    """
    if len(alice_digits) != len(bob_digits):
        raise ValueError("both views must have the same number of digits")
    positions = comparison_positions(len(alice_digits), num_to_compare, position_seed)
    mismatches = [p for p in positions if alice_digits[p] != bob_digits[p]]
    return DigitComparison(passed=not mismatches, positions=positions, mismatches=mismatches)


class PartyPhase(Enum):
    PREPARED = "prepared"
    ANNOUNCED = "announced"
    ESTIMATED = "estimated"
    RECOVERED = "recovered"


@dataclass(frozen=True)
class PublicTranscript:
    """Everything said on the classical channel during one group."""
    record: Optional[MeasurementRecord] = None
    exact: Optional[ConclusiveQuadruple] = None
    normalization: Literal["n_received", "n_sent"] = "n_received"


class Party:
    """One side of the session; sees its own secret and the public transcript only."""
    owns_first_half = True

    def __init__(self, params: PreparationParams, digits_per_value: int, theta_margin: float = THETA_MARGIN):
        self._params = params
        self._digits = digits_per_value
        self._theta_margin = theta_margin
        self._quadruple: Optional[ConclusiveQuadruple] = None
        self._recovered: Optional[RecoveredValues] = None
        self.phase = PartyPhase.PREPARED

    @property
    def name(self) -> str:
        return type(self).__name__

    def _advance(self, expected: PartyPhase, target: PartyPhase) -> None:
        if self.phase is not expected:
            raise RuntimeError(f"{self.name} cannot move from {self.phase.value} to {target.value}")
        self.phase = target

    def announce(self, outcomes: np.ndarray) -> np.ndarray:
        self._advance(PartyPhase.PREPARED, PartyPhase.ANNOUNCED)
        return announce(outcomes)

    def estimate(self, transcript: PublicTranscript) -> Optional[ConclusiveQuadruple]:
        """Conclusive quadruple from the transcript; None if nothing was received."""
        expected = PartyPhase.PREPARED if transcript.record is None else PartyPhase.ANNOUNCED
        self._advance(expected, PartyPhase.ESTIMATED)
        if transcript.exact is not None:
            self._quadruple = transcript.exact
            return self._quadruple
        record = transcript.record
        normalizer = record.n_announced if transcript.normalization == "n_received" else record.n_sent
        if normalizer == 0:
            return None
        self._quadruple = estimate_from_record(record, transcript.normalization)
        return self._quadruple

    def recover(self) -> RecoveredValues:
        self._advance(PartyPhase.ESTIMATED, PartyPhase.RECOVERED)
        if self._quadruple is None:
            raise RuntimeError(f"{self.name} has no estimate to invert")
        self._recovered = recover_partner(self._params, self._quadruple, self._theta_margin)
        return self._recovered

    def view(self) -> str:
        """Own source digits in own half, recovered partner digits in the other."""
        if self._recovered is None:
            raise RuntimeError(f"{self.name} has not recovered the partner's values")
        own = digits_of(self._params.cos_theta, self._digits) + digits_of(self._params.cos_phi, self._digits)
        partner = (digits_of(self._recovered.cos_theta, self._digits)
                   + digits_of(self._recovered.cos_phi, self._digits))
        return own + partner if self.owns_first_half else partner + own


class Alice(Party):
    owns_first_half = True


class Bob(Party):
    owns_first_half = False


class GroupResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    alice: PreparationParams
    bob: PreparationParams
    n_sent: int
    n_received: int
    quadruple: Optional[ConclusiveQuadruple]
    recovered_by_alice: Optional[RecoveredValues]
    recovered_by_bob: Optional[RecoveredValues]
    alice_view: str
    bob_view: str
    verdicts: Dict[str, Verdict]
    comparison: Optional[DigitComparison]
    kept_positions: List[int]
    kept_digits: str
    alice_kept: str
    bob_kept: str
    reasons: List[str]
    # leading digits of each recovered cos theta guaranteed by the group's statistics
    reliable_digits: Dict[str, int] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.reasons


def reliable_theta_digits(own: PreparationParams, recovered: RecoveredValues, n: int, max_digits: int) -> int:
    """Digits of the partner's recovered cos theta that n pairs pin down."""
    if not recovered.theta_reliable:
        return 0
    halfwidth = propagated_halfwidth(own, recovered, max(n, 1))
    return reliable_digit_count(recovered.cos_theta, halfwidth, max_digits)


def group_table(alice: PreparationParams, bob: PreparationParams, cfg: ProtocolConfig):
    """Honest table, then the attack transform, then the error mixture."""
    honest = honest_probabilities(alice, bob)
    attacked = attacked_probabilities(honest, cfg.attack, alice, bob)
    return apply_error_mixture(attacked, cfg.channel.error_rate)


def _sampled_transcript(
    alice_party: Alice, bob_party: Bob, alice: PreparationParams, bob: PreparationParams,
    cfg: ProtocolConfig, eta: float, seed: int,
) -> PublicTranscript:
    honest = honest_probabilities(alice, bob)
    fraction = cfg.attack.effective_fraction
    components = [apply_error_mixture(honest, cfg.channel.error_rate)]
    weights = [1.0]
    if fraction > 0.0:
        components.append(apply_error_mixture(full_attack_table(cfg.attack, alice, bob), cfg.channel.error_rate))
        weights = [1.0 - fraction, fraction]
    draws = draw_mixture(components, weights, cfg.group_size, eta, seed)
    record = MeasurementRecord(
        alice_party.announce(draws.alice_outcomes),
        bob_party.announce(draws.bob_outcomes),
    )
    return PublicTranscript(record=record, normalization=cfg.normalization)


def _discarded(index, alice, bob, cfg, n_received, reason) -> GroupResult:
    return GroupResult(
        index=index, alice=alice, bob=bob, n_sent=cfg.group_size, n_received=n_received,
        quadruple=None, recovered_by_alice=None, recovered_by_bob=None,
        alice_view="", bob_view="", verdicts={}, comparison=None,
        kept_positions=[], kept_digits="", alice_kept="", bob_kept="", reasons=[reason],
    )


def run_group(
    alice: PreparationParams, bob: PreparationParams, cfg: ProtocolConfig, seed: int, index: int = 0
) -> GroupResult:
    """One experiment of group_size pairs; failed checks become discard reasons."""
    sample_seed, position_seed = derive_seeds(seed, 2)
    eta = transmittance(cfg.channel)
    alice_party = Alice(alice, cfg.digits_per_value, cfg.theta_margin)
    bob_party = Bob(bob, cfg.digits_per_value, cfg.theta_margin)

    if cfg.exact_probabilities:
        transcript = PublicTranscript(exact=group_table(alice, bob, cfg).conclusive())
        expected = cfg.group_size * eta if cfg.normalization == "n_received" else cfg.group_size
        normalizer = max(1, int(round(expected)))
        n_received = int(round(cfg.group_size * eta))
    else:
        transcript = _sampled_transcript(alice_party, bob_party, alice, bob, cfg, eta, sample_seed)
        n_received = transcript.record.n_announced
        normalizer = n_received if cfg.normalization == "n_received" else cfg.group_size

    quadruple = alice_party.estimate(transcript)
    if bob_party.estimate(transcript) != quadruple:
        raise RuntimeError("parties disagree on the public estimate")
    if quadruple is None:
        logger.debug("group %d: no pairs received", index)
        return _discarded(index, alice, bob, cfg, n_received, "no_pairs_received")

    recovered_by_alice = alice_party.recover()
    recovered_by_bob = bob_party.recover()
    alice_view = alice_party.view()
    bob_view = bob_party.view()

    tolerances = cfg.check_tolerances
    accuracy = accuracy_check(quadruple, tolerances.accuracy_threshold, normalizer)
    if accuracy.passed and not (recovered_by_alice.reliable and recovered_by_bob.reliable):
        accuracy = accuracy.model_copy(update={"passed": False, "detail": "recovered values unreliable"})
    separation = tolerances.eavesdrop_separation
    eavesdrop = eavesdrop_check(
        quadruple, default_threshold(normalizer, quadruple) if separation is None else separation
    )
    reliable_digits = {
        "cos_theta_a": reliable_theta_digits(bob, recovered_by_bob, normalizer, cfg.digits_per_value),
        "cos_theta_b": reliable_theta_digits(alice, recovered_by_alice, normalizer, cfg.digits_per_value),
    }
    cos_phi_sum = min(abs(recovered_by_alice.cos_phi_sum), abs(recovered_by_bob.cos_phi_sum))
    degeneracy = phi_degeneracy_check(cos_phi_sum, tolerances.cos_phi_sum_floor)
    comparison = digit_comparison(alice_view, bob_view, cfg.digits_sacrificed_per_group, position_seed)

    verdicts = {
        "accuracy_check": accuracy,
        "eavesdrop_check": eavesdrop,
        "phi_degeneracy_check": degeneracy,
        "digit_comparison": Verdict(
            passed=comparison.passed, value=float(len(comparison.mismatches)), threshold=0.0,
            detail=None if comparison.passed else f"mismatch at positions {comparison.mismatches}",
        ),
    }
    reasons = [name for name, verdict in verdicts.items() if not verdict.passed]

    compared = set(comparison.positions)
    kept_positions = [p for p in range(cfg.digits_per_group) if p not in compared] if not reasons else []
    if compared.intersection(kept_positions):
        raise RuntimeError("a compared digit position was kept")
    half = cfg.digits_per_group // 2
    kept_digits = "".join(alice_view[p] if p < half else bob_view[p] for p in kept_positions)

    logger.debug("group %d: %s", index, "kept" if not reasons else "discarded (" + ", ".join(reasons) + ")")
    return GroupResult(
        index=index,
        alice=alice,
        bob=bob,
        n_sent=cfg.group_size,
        n_received=n_received,
        quadruple=quadruple,
        recovered_by_alice=recovered_by_alice,
        recovered_by_bob=recovered_by_bob,
        alice_view=alice_view,
        bob_view=bob_view,
        verdicts=verdicts,
        comparison=comparison,
        kept_positions=kept_positions,
        kept_digits=kept_digits,
        alice_kept="".join(alice_view[p] for p in kept_positions),
        bob_kept="".join(bob_view[p] for p in kept_positions),
        reliable_digits=reliable_digits,
        reasons=reasons,
    )


def _draw_theta(rng: np.random.Generator, margin: float) -> float:
    while True:
        theta = float(rng.uniform(margin, HALF_PI - margin))
        if abs(theta - QUARTER_PI) >= margin:
            return theta


def draw_group_params(
    rng: np.random.Generator, theta_margin: float = THETA_MARGIN, cos_phi_sum_floor: float = 0.2
) -> Tuple[PreparationParams, PreparationParams]:
    """Fresh admissible parameters for both parties, away from the degenerate phase sum."""
    theta_a = _draw_theta(rng, theta_margin)
    theta_b = _draw_theta(rng, theta_margin)
    while True:
        phi_a, phi_b = (float(v) for v in rng.uniform(0.0, HALF_PI, size=2))
        if phi_a > 0.0 and phi_b > 0.0 and abs(math.cos(phi_a + phi_b)) >= cos_phi_sum_floor:
            break
    return PreparationParams(theta=theta_a, phi=phi_a), PreparationParams(theta=theta_b, phi=phi_b)


class SessionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: ProtocolConfig
    groups: List[GroupResult]
    final_key: str
    alice_key: str
    bob_key: str
    key_disagreement: float
    total_pairs_sent: int
    groups_passed: int
    groups_discarded: int
    discard_reasons: Dict[str, int]
    efficiency: float

    @property
    def key_length(self) -> int:
        return len(self.final_key)


def _run_indexed(cfg: ProtocolConfig, index: int, seed: int) -> GroupResult:
    param_seed, run_seed = derive_seeds(seed, 2)
    alice, bob = draw_group_params(
        make_rng(param_seed), cfg.theta_margin, cfg.check_tolerances.cos_phi_sum_floor
    )
    return run_group(alice, bob, cfg, run_seed, index)


def summarize(cfg: ProtocolConfig, groups: Sequence[GroupResult]) -> SessionReport:
    """Assemble the key from kept digits of passing groups, in group order."""
    final_key = "".join(g.kept_digits for g in groups)
    alice_key = "".join(g.alice_kept for g in groups)
    bob_key = "".join(g.bob_kept for g in groups)
    disagreements = sum(a != b for a, b in zip(alice_key, bob_key))
    reasons = Counter(reason for g in groups for reason in g.reasons)
    passed = sum(1 for g in groups if g.passed)
    total_sent = cfg.group_size * len(groups)
    return SessionReport(
        config=cfg,
        groups=list(groups),
        final_key=final_key,
        alice_key=alice_key,
        bob_key=bob_key,
        key_disagreement=disagreements / len(alice_key) if alice_key else 0.0,
        total_pairs_sent=total_sent,
        groups_passed=passed,
        groups_discarded=len(groups) - passed,
        discard_reasons=dict(sorted(reasons.items())),
        efficiency=len(final_key) / total_sent if total_sent else 0.0,
    )


def run_session(cfg: ProtocolConfig) -> SessionReport:
    """Divide-repeat: num_groups independent groups with fresh parameters each."""
    seeds = derive_seeds(cfg.master_seed, cfg.num_groups)
    if cfg.workers > 1 and cfg.num_groups > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            groups = list(pool.map(lambda item: _run_indexed(cfg, *item), enumerate(seeds)))
    else:
        groups = [_run_indexed(cfg, index, seed) for index, seed in enumerate(seeds)]

    report = summarize(cfg, groups)
    logger.info(
        "session: %d/%d groups kept, key of %d digits, efficiency %.4g",
        report.groups_passed, cfg.num_groups, report.key_length, report.efficiency,
    )
    if cfg.num_groups and report.groups_passed == 0:
        logger.warning("every group was discarded: %s", report.discard_reasons)
    return report
