"""
Eve's two individual attacks and what they do to the Alice/Bob statistics.

Intercept-resend: Eve keeps qubit B, sends Bob half of her own Φ_00 pair and
measures B against her own state γ and her kept half E against her state δ. Qubits A
and F are unentangled, so every P_ijkl becomes 1/16.

Entangle-measure: Eve CNOTs B onto an ancilla E and measures E against her state
η; the Alice/Bob table then depends only on the shift classes.

A fraction f < 1 means each pair is attacked independently with probability f,
so the table is the convex combination (1 - f) * honest + f * attacked.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.analytic import (
    THETA_MARGIN,
    PreparationParams,
    conclusive_probabilities,
    entangle_measure_probabilities,
    honest_probabilities,
)
from src.estimator import RecoveredValues, estimate_probabilities, recover_partner
from src.sampling import CountTable, counts_from_draws, derive_seeds, draw_mixture, sample_counts
from src.tables import ConclusiveQuadruple, ProbabilityTable

logger = logging.getLogger(__name__)

# Below this many jointly conclusive pairs on a link Eve's estimate is flagged.
MIN_CONCLUSIVE = 20


class AttackKind(str, Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    ENTANGLE_MEASURE = "entangle_measure"


class AttackConfig(BaseModel):
    """Attack kind, attacked fraction and Eve's own preparations."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: AttackKind = AttackKind.NONE
    fraction: float = Field(default=1.0, ge=0.0, le=1.0)
    eve_gamma: Optional[PreparationParams] = None
    eve_delta: Optional[PreparationParams] = None
    eve_eta: Optional[PreparationParams] = None

    @model_validator(mode="after")
    def eve_states_present(self):
        if self.kind is AttackKind.INTERCEPT_RESEND and (self.eve_gamma is None or self.eve_delta is None):
            raise ValueError("intercept_resend needs eve_gamma and eve_delta")
        if self.kind is AttackKind.ENTANGLE_MEASURE and self.eve_eta is None:
            raise ValueError("entangle_measure needs eve_eta")
        return self

    @property
    def effective_fraction(self) -> float:
        return 0.0 if self.kind is AttackKind.NONE else self.fraction


def full_attack_table(attack: AttackConfig, alice: PreparationParams, bob: PreparationParams) -> ProbabilityTable:
    """Alice/Bob table when every pair is attacked."""
    if attack.kind is AttackKind.INTERCEPT_RESEND:
        return ProbabilityTable.uniform(2)
    if attack.kind is AttackKind.ENTANGLE_MEASURE:
        return entangle_measure_probabilities(alice, bob, attack.eve_eta)
    return honest_probabilities(alice, bob)


def attacked_probabilities(
    honest: ProbabilityTable, attack: AttackConfig, alice: PreparationParams, bob: PreparationParams
) -> ProbabilityTable:
    fraction = attack.effective_fraction
    if fraction == 0.0:
        return honest
    attacked = full_attack_table(attack, alice, bob)
    if fraction == 1.0:
        return attacked
    return honest.mix(attacked, fraction)


def simulate_attacked_counts(
    honest: ProbabilityTable,
    attack: AttackConfig,
    alice: PreparationParams,
    bob: PreparationParams,
    n: int,
    eta: float,
    seed: int,
) -> CountTable:
    """Per-pair Bernoulli(f) attack choice, then an outcome from the chosen table."""
    fraction = attack.effective_fraction
    draws = draw_mixture(
        [honest, full_attack_table(attack, alice, bob)], [1.0 - fraction, fraction], n, eta, seed
    )
    return counts_from_draws(draws)


@dataclass(frozen=True)
class EveTranscript:
    """Eve's view of her two links as conclusive quadruples.

    alice_link pairs Alice's α-A outcomes (first index) with Eve's γ-B
    outcomes; bob_link pairs Eve's δ-E outcomes (first index) with Bob's β-F
    outcomes. The conclusive totals are None for exact probabilities.
    """
    alice_link: ConclusiveQuadruple
    bob_link: ConclusiveQuadruple
    alice_link_conclusive: Optional[int] = None
    bob_link_conclusive: Optional[int] = None

    @classmethod
    def exact(cls, attack: AttackConfig, alice: PreparationParams, bob: PreparationParams) -> "EveTranscript":
        return cls(
            conclusive_probabilities(alice, attack.eve_gamma),
            conclusive_probabilities(attack.eve_delta, bob),
        )

    @classmethod
    def from_counts(cls, alice_link: CountTable, bob_link: CountTable) -> "EveTranscript":
        return cls(
            estimate_probabilities(alice_link),
            estimate_probabilities(bob_link),
            alice_link.conclusive_counts().total,
            bob_link.conclusive_counts().total,
        )


def simulate_eve_transcript(
    attack: AttackConfig, alice: PreparationParams, bob: PreparationParams, n: int, seed: int, eta: float = 1.0
) -> EveTranscript:
    """Sample both intercept-resend links for n intercepted pairs."""
    if attack.kind is not AttackKind.INTERCEPT_RESEND:
        raise ValueError("Eve's transcript exists only for the intercept-resend attack")
    alice_seed, bob_seed = derive_seeds(seed, 2)
    alice_link = sample_counts(honest_probabilities(alice, attack.eve_gamma), n, 1.0, alice_seed)
    bob_link = sample_counts(honest_probabilities(attack.eve_delta, bob), n, eta, bob_seed)
    return EveTranscript.from_counts(alice_link, bob_link)


@dataclass(frozen=True)
class EveEstimate:
    """Eve's (cos theta_a, cos phi_a) and (cos theta_b, cos phi_b)."""
    alice_values: Optional[RecoveredValues]
    bob_values: Optional[RecoveredValues]
    reliable: bool
    reason: Optional[str] = None

    def as_tuple(self) -> Tuple[float, float, float, float]:
        if self.alice_values is None or self.bob_values is None:
            raise ValueError(f"no estimate available: {self.reason}")
        return (
            self.alice_values.cos_theta,
            self.alice_values.cos_phi,
            self.bob_values.cos_theta,
            self.bob_values.cos_phi,
        )


def eve_recovered_values(
    attack: AttackConfig,
    transcript: Optional[EveTranscript],
    min_conclusive: int = MIN_CONCLUSIVE,
    theta_margin: float = THETA_MARGIN,
) -> EveEstimate:
    """Eve inverts the conclusive equations on each link as the honest partner would.

    On the γ-B link she stands where Bob stands, with (x', y') in place of
    (x, y); on the δ-E link she stands where Alice stands with (a', b').
    """
    if attack.kind is not AttackKind.INTERCEPT_RESEND or attack.fraction < 1.0 or transcript is None:
        return EveEstimate(None, None, False, "requires a full intercept-resend attack")

    alice_values = recover_partner(attack.eve_gamma, transcript.alice_link, theta_margin)
    bob_values = recover_partner(attack.eve_delta, transcript.bob_link, theta_margin)
    reason = None
    counts = (transcript.alice_link_conclusive, transcript.bob_link_conclusive)
    if any(c is not None and c < min_conclusive for c in counts):
        reason = f"fewer than {min_conclusive} conclusive pairs on a link"
    elif not (alice_values.reliable and bob_values.reliable):
        reason = "inversion left its valid domain"
    if reason:
        logger.warning("Eve's estimate unreliable: %s", reason)
    return EveEstimate(alice_values, bob_values, reason is None, reason)
