"""
From counts to shared digits.

estimate_probabilities turns counts into the conclusive quadruple,
recover_partner inverts the two conclusive-probability equations for the
other party's (cos theta, cos phi), accuracy_halfwidth is the count
fluctuation bound on the probability scale, and extract_digits truncates a
value to its leading decimal digits.
"""
import logging
import math
from dataclasses import dataclass
from typing import Literal

from src.analytic import HALF_PI, THETA_MARGIN, PreparationParams
from src.sampling import ConclusiveCounts, CountTable, MeasurementRecord
from src.tables import ConclusiveQuadruple

logger = logging.getLogger(__name__)

Normalization = Literal["n_received", "n_sent"]

# Slack for domain checks on exact inputs that land a rounding error outside.
DOMAIN_SLACK = 1e-9
# Absorbs float noise like 0.29999999999999 when truncating digits.
TRUNCATION_SLACK = 1e-9


@dataclass(frozen=True)
class RecoveredValues:
    """The partner's cos(theta) and cos(phi) as recovered by one party."""
    cos_theta: float
    cos_phi: float
    theta_reliable: bool
    phi_reliable: bool
    divisor_margin: float
    cos_phi_sum: float

    @property
    def reliable(self) -> bool:
        return self.theta_reliable and self.phi_reliable


def divisor_floor(theta_margin: float = THETA_MARGIN) -> float:
    """Smallest |cos 2 theta| allowed for a party at least theta_margin from pi/4."""
    return math.sin(2.0 * theta_margin)


def _quadruple(counts: ConclusiveCounts, normalizer: int) -> ConclusiveQuadruple:
    if normalizer <= 0:
        raise ValueError("cannot estimate probabilities with a zero normalizer")
    return ConclusiveQuadruple(*(c / normalizer for c in counts))


def estimate_probabilities(counts: CountTable, normalization: Normalization = "n_received") -> ConclusiveQuadruple:
    """P_exp = N / normalizer for the four jointly conclusive outcomes."""
    normalizer = counts.n_received if normalization == "n_received" else counts.n_sent
    return _quadruple(counts.conclusive_counts(), normalizer)


def estimate_from_record(record: MeasurementRecord, normalization: Normalization = "n_received") -> ConclusiveQuadruple:
    """Same estimate from the public announcements alone."""
    normalizer = record.n_announced if normalization == "n_received" else record.n_sent
    return _quadruple(record.joint_conclusive_counts(), normalizer)


def recover_partner(
    own: PreparationParams, probs: ConclusiveQuadruple, theta_margin: float = THETA_MARGIN
) -> RecoveredValues:
    """Solve the conclusive-probability equations for the partner's parameters.

    Uses S = sym + asym and D = sym - asym of the averaged pairs:
    cos^2 theta_p = (4 S - sin^2 theta_own) / cos 2 theta_own and
    cos(phi_own + phi_p) = 2 D / (cos theta_own sin theta_own cos theta_p sin theta_p).
    Out-of-range intermediates are clamped and flagged, never raised.
    """
    if min(probs) < 0:
        raise ValueError("probabilities must be non-negative")
    total = probs.symmetric + probs.asymmetric
    delta = probs.symmetric - probs.asymmetric
    divisor = math.cos(2.0 * own.theta)
    divisor_ok = abs(divisor) >= divisor_floor(theta_margin) - DOMAIN_SLACK

    if abs(divisor) < 1e-15:
        return RecoveredValues(0.0, 0.0, False, False, abs(divisor), 0.0)

    cos2_partner = (4.0 * total - own.sin_theta ** 2) / divisor
    theta_ok = divisor_ok and -DOMAIN_SLACK <= cos2_partner <= 1.0 + DOMAIN_SLACK
    cos2_partner = min(1.0, max(0.0, cos2_partner))
    cos_theta_p = math.sqrt(cos2_partner)
    sin_theta_p = math.sqrt(1.0 - cos2_partner)

    denominator = own.cos_theta * own.sin_theta * cos_theta_p * sin_theta_p
    if denominator < 1e-12:
        # partner at a pole: the phase never shows up in the probabilities
        logger.debug("partner phase undetermined (denominator %.3g)", denominator)
        return RecoveredValues(cos_theta_p, 0.0, theta_ok, False, abs(divisor), 0.0)

    cos_sum = 2.0 * delta / denominator
    phi_ok = theta_ok and -1.0 - DOMAIN_SLACK <= cos_sum <= 1.0 + DOMAIN_SLACK
    cos_sum = min(1.0, max(-1.0, cos_sum))
    phi_partner = math.acos(cos_sum) - own.phi
    if not -DOMAIN_SLACK <= phi_partner <= HALF_PI + DOMAIN_SLACK:
        phi_ok = False
    phi_partner = min(HALF_PI, max(0.0, phi_partner))
    return RecoveredValues(
        cos_theta=cos_theta_p,
        cos_phi=math.cos(phi_partner),
        theta_reliable=theta_ok,
        phi_reliable=phi_ok,
        divisor_margin=abs(divisor),
        cos_phi_sum=cos_sum,
    )


def accuracy_halfwidth(n: int, p: float) -> float:
    """sqrt(2 n p (1 - p)) / n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not -DOMAIN_SLACK <= p <= 1.0 + DOMAIN_SLACK:
        raise ValueError(f"p must be in [0, 1], got {p}")
    p = min(1.0, max(0.0, p))
    return math.sqrt(2.0 * n * p * (1.0 - p)) / n


def propagated_halfwidth(own: PreparationParams, recovered: RecoveredValues, n: int) -> float:
    """Half-width of the recovered cos(theta) implied by the probability half-width.

    S = sym + asym is half the count of the four conclusive cells over n,
    whose total probability is 2S; d cos(theta_p) / dS = 2 / (|cos 2 theta_own| cos theta_p).
    """
    if recovered.divisor_margin == 0.0 or recovered.cos_theta == 0.0:
        return math.inf
    total = (own.sin_theta ** 2 + recovered.cos_theta ** 2 * math.cos(2.0 * own.theta)) / 4.0
    width_s = 0.5 * accuracy_halfwidth(n, min(1.0, max(0.0, 2.0 * total)))
    return 2.0 * width_s / (recovered.divisor_margin * recovered.cos_theta)


def extract_digits(value: float, num_digits: int) -> str:
    """First num_digits decimal digits of value, truncated (0.7342, 1 -> "7")."""
    if num_digits < 1:
        raise ValueError(f"num_digits must be >= 1, got {num_digits}")
    if not 0.0 <= value < 1.0:
        raise ValueError(f"value must be in [0, 1), got {value}")
    scaled = min(math.floor(value * 10 ** num_digits + TRUNCATION_SLACK), 10 ** num_digits - 1)
    return str(scaled).zfill(num_digits)


def digits_of(value: float, num_digits: int) -> str:
    """extract_digits after clipping into [0, 1); a clamped cos of 1.0 reads as all nines."""
    return extract_digits(min(max(value, 0.0), math.nextafter(1.0, 0.0)), num_digits)


def reliable_digit_count(value: float, halfwidth: float, max_digits: int) -> int:
    """Leading digits guaranteed when the value is known to +- halfwidth.

    Digit k is safe only if [value - w, value + w] stays inside one cell of
    width 10^-k; truncation has no carries, so the first unsafe digit ends
    the count.
    """
    if not math.isfinite(halfwidth):
        return 0
    count = 0
    for k in range(1, max_digits + 1):
        step = 10.0 ** -k
        low = math.floor((value - halfwidth) / step + TRUNCATION_SLACK)
        high = math.floor((value + halfwidth) / step + TRUNCATION_SLACK)
        if low != high:
            break
        count = k
    return count
