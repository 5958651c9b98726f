"""
Seeded Monte Carlo draws of joint Bell outcomes.

Random source: numpy's PCG64 bit generator behind ``numpy.random.Generator``.
Each call builds its own generator from an integer seed, so calls never share
state. Independent repetitions take their seeds from ``derive_seeds``, which
spawns children of ``numpy.random.SeedSequence(master_seed)``; child k is
always the same integer for the same master seed.

Outcome encoding: a party's Bell outcome Φ_sp is the code 2*s + p
(Φ_00=0, Φ_01=1, Φ_10=2, Φ_11=3), a joint outcome is 4*alice + bob, which
is the lexicographic (i, j, k, l) order of ProbabilityTable.flat(). Lost
pairs carry the code -1.
"""
import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.tables import ProbabilityTable

logger = logging.getLogger(__name__)

LOST = -1
TABLE_SUM_TOL = 1e-9


class Announcement(IntEnum):
    """What a party says publicly about one pair."""
    LOST = -1
    INCONCLUSIVE = 0
    PHI_10 = 2
    PHI_11 = 3


class ConclusiveCounts(NamedTuple):
    n1010: int
    n1011: int
    n1110: int
    n1111: int

    @property
    def total(self) -> int:
        return self.n1010 + self.n1011 + self.n1110 + self.n1111


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seeds(master_seed: int, count: int) -> List[int]:
    """Child seeds of SeedSequence(master_seed), one 64-bit integer each."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def _cdf(table: ProbabilityTable) -> np.ndarray:
    if abs(table.total - 1.0) > TABLE_SUM_TOL:
        raise ValueError(f"sampling needs a normalized table (total = {table.total!r})")
    cdf = np.cumsum(table.flat())
    return cdf / cdf[-1]


def _inverse_cdf(cdf: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, uniforms, side="right"), cdf.size - 1)


@dataclass(frozen=True, eq=False)
class OutcomeDraws:
    """Per-pair joint outcome codes, -1 where the pair was lost."""
    joint: np.ndarray
    component: Optional[np.ndarray] = None

    @property
    def n_sent(self) -> int:
        return int(self.joint.size)

    @property
    def received(self) -> np.ndarray:
        return self.joint != LOST

    @property
    def alice_outcomes(self) -> np.ndarray:
        return np.where(self.received, self.joint // 4, LOST)

    @property
    def bob_outcomes(self) -> np.ndarray:
        return np.where(self.received, self.joint % 4, LOST)


def _validate_draw_args(n: int, eta: float) -> None:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")


def draw_outcomes(table: ProbabilityTable, n: int, eta: float, seed: int) -> OutcomeDraws:
    """Each of n pairs survives with probability eta, then draws from the table."""
    _validate_draw_args(n, eta)
    cdf = _cdf(table)
    rng = make_rng(seed)
    survived = rng.random(n) < eta
    joint = _inverse_cdf(cdf, rng.random(n))
    joint[~survived] = LOST
    return OutcomeDraws(joint)


def draw_mixture(
    tables: Sequence[ProbabilityTable], weights: Sequence[float], n: int, eta: float, seed: int
) -> OutcomeDraws:
    """Per pair: pick a table with the given weights, then an outcome from it."""
    _validate_draw_args(n, eta)
    weights = np.asarray(weights, dtype=np.float64)
    if len(tables) != weights.size or np.any(weights < 0) or abs(weights.sum() - 1.0) > TABLE_SUM_TOL:
        raise ValueError("mixture weights must be non-negative, one per table, summing to 1")
    cdfs = [_cdf(table) for table in tables]
    rng = make_rng(seed)
    survived = rng.random(n) < eta
    component = _inverse_cdf(np.cumsum(weights) / weights.sum(), rng.random(n))
    uniforms = rng.random(n)
    joint = np.empty(n, dtype=np.int64)
    for index, cdf in enumerate(cdfs):
        mask = component == index
        joint[mask] = _inverse_cdf(cdf, uniforms[mask])
    joint[~survived] = LOST
    return OutcomeDraws(joint, component)


@dataclass(frozen=True, eq=False)
class CountTable:
    """Joint outcome counts N_ijkl of the received pairs."""
    counts: np.ndarray
    n_sent: int
    n_received: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True).reshape((2, 2, 2, 2))
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if int(counts.sum()) != self.n_received or self.n_received > self.n_sent:
            raise ValueError(
                f"inconsistent tallies: sum(counts)={int(counts.sum())}, "
                f"n_received={self.n_received}, n_sent={self.n_sent}"
            )
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    def __getitem__(self, key: str) -> int:
        return int(self.counts[tuple(int(ch) for ch in key)])

    @property
    def n_lost(self) -> int:
        return self.n_sent - self.n_received

    @property
    def alice_conclusive(self) -> int:
        return int(self.counts[1].sum())

    @property
    def alice_inconclusive(self) -> int:
        return self.n_received - self.alice_conclusive

    @property
    def bob_conclusive(self) -> int:
        return int(self.counts[:, :, 1, :].sum())

    @property
    def bob_inconclusive(self) -> int:
        return self.n_received - self.bob_conclusive

    def conclusive_counts(self) -> ConclusiveCounts:
        return ConclusiveCounts(self["1010"], self["1011"], self["1110"], self["1111"])

    def frequencies(self) -> np.ndarray:
        if self.n_received == 0:
            return np.zeros(self.counts.shape)
        return self.counts / self.n_received


def counts_from_draws(draws: OutcomeDraws) -> CountTable:
    received = draws.joint[draws.received]
    counts = np.bincount(received, minlength=16)
    return CountTable(counts, n_sent=draws.n_sent, n_received=int(received.size))


def sample_counts(table: ProbabilityTable, n: int, eta: float, seed: int) -> CountTable:
    """Deterministic for a fixed seed: same inputs, same CountTable."""
    counts = counts_from_draws(draw_outcomes(table, n, eta, seed))
    logger.debug("sampled %d pairs (eta=%.4f): %d received", n, eta, counts.n_received)
    return counts


def announce(outcomes: np.ndarray) -> np.ndarray:
    """One party's public announcements: Φ_10/Φ_11 pass, Φ_00/Φ_01 become inconclusive."""
    outcomes = np.asarray(outcomes)
    announced = np.where(outcomes >= 2, outcomes, int(Announcement.INCONCLUSIVE))
    return np.where(outcomes == LOST, int(Announcement.LOST), announced).astype(np.int8)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Per-pair public announcements of both parties."""
    alice: np.ndarray
    bob: np.ndarray

    def __post_init__(self):
        if len(self.alice) != len(self.bob):
            raise ValueError("both parties must announce every pair")

    def __len__(self) -> int:
        return len(self.alice)

    @property
    def n_sent(self) -> int:
        return len(self)

    @property
    def n_announced(self) -> int:
        """Pairs Bob reported as received (conclusive or inconclusive)."""
        return int(np.count_nonzero(self.bob != Announcement.LOST))

    def pairs(self) -> Iterator[Tuple[Announcement, Announcement]]:
        for a, b in zip(self.alice, self.bob):
            yield Announcement(int(a)), Announcement(int(b))

    def joint_conclusive_counts(self) -> ConclusiveCounts:
        def count(a: Announcement, b: Announcement) -> int:
            return int(np.count_nonzero((self.alice == a) & (self.bob == b)))

        return ConclusiveCounts(
            count(Announcement.PHI_10, Announcement.PHI_10),
            count(Announcement.PHI_10, Announcement.PHI_11),
            count(Announcement.PHI_11, Announcement.PHI_10),
            count(Announcement.PHI_11, Announcement.PHI_11),
        )


def to_announcements(draws: OutcomeDraws) -> MeasurementRecord:
    return MeasurementRecord(announce(draws.alice_outcomes), announce(draws.bob_outcomes))
