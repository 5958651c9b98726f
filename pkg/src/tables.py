"""
Amplitude and probability tables indexed by joint Bell outcomes.

A table of arity k holds one entry per k-tuple of Bell indices. Each Bell
index is the pair (shift, phase), so an arity-2 qubit table is indexed by
(i, j, k, l): Alice's outcome Φ_ij and Bob's outcome Φ_kl. Entries are
stored as a dense array of shape (d,) * 2k in lexicographic order, which is
also the iteration order used for sampling.
"""
from dataclasses import dataclass
from typing import NamedTuple, Tuple, Union

import numpy as np

NORM_TOL = 1e-12

# Bell outcomes a linear-optics analyzer can tell apart.
CONCLUSIVE_PARTY_OUTCOMES = ((1, 0), (1, 1))
CONCLUSIVE_OUTCOMES = ("1010", "1011", "1110", "1111")

Key = Union[str, Tuple[int, ...]]


def parse_key(key: Key, length: int) -> Tuple[int, ...]:
    """Turn "1010" or (1, 0, 1, 0) into an index tuple of the given length."""
    if isinstance(key, str):
        index = tuple(int(ch) for ch in key)
    else:
        index = tuple(int(v) for v in key)
    if len(index) != length:
        raise ValueError(f"key {key!r} must have {length} components")
    return index


def outcome_label(index: Tuple[int, ...]) -> str:
    """Inverse of parse_key for single-digit indices."""
    return "".join(str(v) for v in index)


class ConclusiveQuadruple(NamedTuple):
    """The four experimentally accessible probabilities P_1010, P_1011, P_1110, P_1111."""
    p1010: float
    p1011: float
    p1110: float
    p1111: float

    @property
    def symmetric(self) -> float:
        """Average of P_1010 and P_1111, the pair carrying the plus sign."""
        return 0.5 * (self.p1010 + self.p1111)

    @property
    def asymmetric(self) -> float:
        return 0.5 * (self.p1011 + self.p1110)

    @property
    def total(self) -> float:
        return self.p1010 + self.p1011 + self.p1110 + self.p1111

    @property
    def mean(self) -> float:
        return 0.25 * self.total

    @property
    def separation(self) -> float:
        return abs(self.symmetric - self.asymmetric)

    def as_dict(self):
        return dict(zip(CONCLUSIVE_OUTCOMES, (float(v) for v in self)))


def _frozen(values: np.ndarray, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class AmplitudeTable:
    """Complex amplitudes V keyed by a multi-index of Bell outcomes."""
    dim: int
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values, np.complex128)
        if values.ndim not in (4, 6) or any(n != self.dim for n in values.shape):
            raise ValueError(f"amplitude table must have shape ({self.dim},)*4 or *6, got {values.shape}")
        norm = float(np.sum(np.abs(values) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitude table is not normalized (sum |V|^2 = {norm!r})")
        object.__setattr__(self, "values", values)

    @property
    def arity(self) -> int:
        return self.values.ndim // 2

    def __getitem__(self, key: Key) -> complex:
        return complex(self.values[parse_key(key, self.values.ndim)])

    def probabilities(self) -> "ProbabilityTable":
        """|V|^2, marginalized over any pairs beyond the first two."""
        squared = np.abs(self.values) ** 2
        if self.arity == 3:
            squared = squared.sum(axis=(4, 5))
        return ProbabilityTable(self.dim, squared)

    def max_abs_diff(self, other: "AmplitudeTable") -> float:
        return float(np.max(np.abs(self.values - other.values)))

    def max_magnitude_diff(self, other: "AmplitudeTable") -> float:
        return float(np.max(np.abs(np.abs(self.values) - np.abs(other.values))))


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """Real probabilities keyed by the joint Bell outcome (i, j, k, l)."""
    dim: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.shape != (self.dim,) * 4:
            raise ValueError(f"probability table must have shape ({self.dim},)*4, got {values.shape}")
        if np.any(values < -NORM_TOL):
            raise ValueError("probability table has negative entries")
        values = np.clip(values, 0.0, None)
        total = float(values.sum())
        if total > 1.0 + NORM_TOL:
            raise ValueError(f"probability table sums to {total!r} > 1")
        object.__setattr__(self, "values", _frozen(values, np.float64))

    @classmethod
    def uniform(cls, dim: int = 2) -> "ProbabilityTable":
        return cls(dim, np.full((dim,) * 4, 1.0 / dim ** 4))

    @classmethod
    def from_flat(cls, flat, dim: int = 2) -> "ProbabilityTable":
        return cls(dim, np.asarray(flat, dtype=np.float64).reshape((dim,) * 4))

    def __getitem__(self, key: Key) -> float:
        return float(self.values[parse_key(key, 4)])

    @property
    def total(self) -> float:
        return float(self.values.sum())

    @property
    def is_complete(self) -> bool:
        return abs(self.total - 1.0) <= NORM_TOL

    def flat(self) -> np.ndarray:
        """Entries in lexicographic (i, j, k, l) order."""
        return self.values.reshape(-1)

    def mix(self, other: "ProbabilityTable", weight: float) -> "ProbabilityTable":
        """(1 - weight) * self + weight * other."""
        if other.dim != self.dim:
            raise ValueError("cannot mix tables of different dimension")
        return ProbabilityTable(self.dim, (1.0 - weight) * self.values + weight * other.values)

    def conclusive(self) -> ConclusiveQuadruple:
        if self.dim != 2:
            raise ValueError("the conclusive quadruple is defined for qubits only")
        return ConclusiveQuadruple(*(self[label] for label in CONCLUSIVE_OUTCOMES))

    def max_abs_diff(self, other: "ProbabilityTable") -> float:
        return float(np.max(np.abs(self.values - other.values)))

    def as_dict(self):
        return {outcome_label(index): float(v) for index, v in np.ndenumerate(self.values)}
