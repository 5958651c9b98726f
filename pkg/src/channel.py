"""
Loss and error models for the line carrying qubit B from Alice to Bob.

transmittance=10^(-(alpha*l + c)/10). Errors are modeled as depolarization
of qubit B, which at the probability level is uniform mixing with the
1/16 table.
"""
import logging

from pydantic import BaseModel, ConfigDict, Field

from src.tables import ProbabilityTable

logger = logging.getLogger(__name__)


class ChannelConfig(BaseModel):
    """Fiber attenuation (dB/km), length (km), fixed loss (dB) and error rate."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(default=0.0, ge=0.0)
    length_km: float = Field(default=0.0, ge=0.0)
    fixed_loss_db: float = Field(default=0.0, ge=0.0)
    error_rate: float = Field(default=0.0, ge=0.0, le=1.0)

    @property
    def total_loss_db(self) -> float:
        return self.alpha * self.length_km + self.fixed_loss_db


def transmittance(cfg: ChannelConfig) -> float:
    """Probability a pair survives the line: 10^(-(alpha l + c)/10)."""
    return 10.0 ** (-cfg.total_loss_db / 10.0)


def apply_error_mixture(ideal: ProbabilityTable, error_rate: float) -> ProbabilityTable:
    """(1 - eps) * ideal + eps / 16 on every entry."""
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError(f"error_rate must be in [0, 1], got {error_rate}")
    if not ideal.is_complete:
        raise ValueError(f"error mixture needs a complete table (total = {ideal.total!r})")
    if error_rate == 0.0:
        return ideal
    return ideal.mix(ProbabilityTable.uniform(ideal.dim), error_rate)
