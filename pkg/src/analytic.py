"""
Closed-form amplitude and probability tables.

Qubit tables follow the four value classes (xa +- yb), (xb +- ya) of the
two-party Bell-basis expansion; qudit tables follow the generalized sum over
m with indices taken mod d. Every closed form here has a brute-force twin
built from the state builders below and src.qmath, and src.verification
compares the two.

Index convention for all tables: (i, j) is Alice's outcome Φ_ij on her
(α, A) pair and (k, l) is Bob's outcome Φ_kl on his (β, B) pair, with the
first index the shift and the second the phase of the generalized Bell state.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.qmath import PureState, bell_state, BellIndex, ghz_state, single_site, tensor
from src.tables import (
    NORM_TOL,
    AmplitudeTable,
    ConclusiveQuadruple,
    ProbabilityTable,
)

__all__ = [
    "AmplitudeTable",
    "ConclusiveQuadruple",
    "ProbabilityTable",
    "PreparationParams",
    "QuditPreparation",
    "THETA_MARGIN",
    "HONEST_PAIRING",
    "ENTANGLE_PAIRING",
    "closed_form_v_qubit",
    "closed_form_v_qudit",
    "conclusive_probabilities",
    "honest_probabilities",
    "qudit_probabilities",
    "entangle_measure_probabilities",
    "honest_state",
    "honest_state_qudit",
    "entangle_measure_state",
]

HALF_PI = math.pi / 2
QUARTER_PI = math.pi / 4

# Exclusion half-width around theta = pi/4, where recovery divides by cos 2 theta.
THETA_MARGIN = 0.1

# Site order (α, β, A, B); Alice pairs α with A, Bob pairs β with B.
HONEST_PAIRING = ((0, 2), (1, 3))
# Site order (α, β, η, A, B, E); Eve pairs her state η with the ancilla E.
ENTANGLE_PAIRING = ((0, 3), (1, 4), (2, 5))

_INV_2SQRT2 = 1.0 / (2.0 * math.sqrt(2.0))


class PreparationParams(BaseModel):
    """A party's secret state cos(theta)|0> + sin(theta) e^{i phi}|1>."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    theta: float = Field(ge=0.0, le=HALF_PI)
    phi: float = Field(ge=0.0, le=HALF_PI)

    @classmethod
    def from_amplitudes(cls, a: complex, b: complex) -> "PreparationParams":
        """Inverse of amplitudes(), up to the global phase of a."""
        norm = math.hypot(abs(a), abs(b))
        if norm == 0:
            raise ValueError("amplitudes must not both vanish")
        theta = math.acos(min(1.0, abs(a) / norm))
        phi = 0.0
        if abs(b) > 0 and abs(a) > 0:
            phi = (np.angle(b) - np.angle(a)) % (2 * math.pi)
        return cls(theta=theta, phi=float(phi))

    @property
    def amplitudes(self) -> Tuple[complex, complex]:
        return complex(math.cos(self.theta)), math.sin(self.theta) * complex(math.cos(self.phi), math.sin(self.phi))

    @property
    def cos_theta(self) -> float:
        return math.cos(self.theta)

    @property
    def sin_theta(self) -> float:
        return math.sin(self.theta)

    @property
    def cos_phi(self) -> float:
        return math.cos(self.phi)

    def is_admissible(self, theta_margin: float = THETA_MARGIN) -> bool:
        """Open ranges (0, pi/2) and at least theta_margin away from pi/4."""
        return (
            0.0 < self.theta < HALF_PI
            and 0.0 < self.phi < HALF_PI
            and abs(self.theta - QUARTER_PI) >= theta_margin
        )


@dataclass(frozen=True, eq=False)
class QuditPreparation:
    """Unit-norm coefficients a_i of sum_i a_i |i>."""
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.complex128, copy=True).reshape(-1)
        if coeffs.size < 2:
            raise ValueError("a qudit preparation needs at least two coefficients")
        norm = float(np.vdot(coeffs, coeffs).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"qudit preparation is not normalized (norm^2 = {norm!r})")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def normalized(cls, coeffs) -> "QuditPreparation":
        vector = np.asarray(coeffs, dtype=np.complex128)
        return cls(vector / np.linalg.norm(vector))

    @classmethod
    def from_params(cls, params: PreparationParams) -> "QuditPreparation":
        return cls(np.array(params.amplitudes))

    @property
    def dim(self) -> int:
        return self.coeffs.size


def closed_form_v_qubit(alice: PreparationParams, bob: PreparationParams) -> AmplitudeTable:
    """V_ijkl for the qubit setup from the four value classes."""
    a, b = alice.amplitudes
    x, y = bob.amplitudes
    plus_diag = (x * a + y * b) * _INV_2SQRT2
    minus_diag = (x * a - y * b) * _INV_2SQRT2
    plus_cross = (x * b + y * a) * _INV_2SQRT2
    minus_cross = (x * b - y * a) * _INV_2SQRT2

    values = np.zeros((2, 2, 2, 2), dtype=np.complex128)
    for label in ("0000", "0101", "1010", "1111"):
        values[tuple(int(c) for c in label)] = plus_diag
    for label in ("0001", "0100", "1011", "1110"):
        values[tuple(int(c) for c in label)] = minus_diag
    for label, sign in (("0010", 1), ("0111", -1), ("1000", 1), ("1101", -1)):
        values[tuple(int(c) for c in label)] = sign * plus_cross
    for label, sign in (("0011", 1), ("0110", -1), ("1001", 1), ("1100", -1)):
        values[tuple(int(c) for c in label)] = sign * minus_cross
    return AmplitudeTable(2, values)


def closed_form_v_qudit(alice: QuditPreparation, bob: QuditPreparation, d: int) -> AmplitudeTable:
    """V_ijkl = (1/(d sqrt d)) w^(ij+kl) sum_m w^(-(j+l)m) a_(m-i) x_(m-k), indices mod d.

    The shift of Alice's outcome (i) indexes her coefficients; with that
    reading the sum equals the brute-force expansion exactly, phases included.
    """
    if alice.dim != d or bob.dim != d:
        raise ValueError(f"both preparations must have length d={d} (got {alice.dim}, {bob.dim})")
    phases = np.exp(2j * np.pi * np.arange(d) / d)
    m = np.arange(d)
    a, x = alice.coeffs, bob.coeffs
    values = np.zeros((d,) * 4, dtype=np.complex128)
    for i, j, k, l in itertools.product(range(d), repeat=4):
        terms = phases[(-(j + l) * m) % d] * a[(m - i) % d] * x[(m - k) % d]
        values[i, j, k, l] = phases[(i * j + k * l) % d] * terms.sum()
    return AmplitudeTable(d, values / (d * math.sqrt(d)))


def conclusive_probabilities(alice: PreparationParams, bob: PreparationParams) -> ConclusiveQuadruple:
    """P_1010 = P_1111 and P_1011 = P_1110 in the theta/phi parametrization."""
    ca, sa = alice.cos_theta, alice.sin_theta
    cb, sb = bob.cos_theta, bob.sin_theta
    base = ca * ca * cb * cb + sa * sa * sb * sb
    cross = 2.0 * ca * cb * sa * sb * math.cos(alice.phi + bob.phi)
    plus = (base + cross) / 8.0
    minus = (base - cross) / 8.0
    return ConclusiveQuadruple(plus, minus, minus, plus)


def honest_probabilities(alice: PreparationParams, bob: PreparationParams) -> ProbabilityTable:
    """All sixteen |V_ijkl|^2 of the honest qubit setup."""
    return closed_form_v_qubit(alice, bob).probabilities()


def qudit_probabilities(alice: QuditPreparation, bob: QuditPreparation, d: int) -> ProbabilityTable:
    return closed_form_v_qudit(alice, bob, d).probabilities()


def entangle_measure_probabilities(
    alice: PreparationParams, bob: PreparationParams, eve: PreparationParams
) -> ProbabilityTable:
    """Alice/Bob table when every qubit B is CNOT-entangled with Eve's ancilla.

    Entries with equal shifts (i == k) are (|xa|^2 + |yb|^2)/8, the rest
    (|xb|^2 + |ya|^2)/8. Eve's state only enters her own outcomes, so
    ``eve`` does not change the table.
    """
    a, b = alice.amplitudes
    x, y = bob.amplitudes
    same_shift = (abs(x * a) ** 2 + abs(y * b) ** 2) / 8.0
    other_shift = (abs(x * b) ** 2 + abs(y * a) ** 2) / 8.0
    values = np.empty((2, 2, 2, 2))
    for i, j, k, l in itertools.product(range(2), repeat=4):
        values[i, j, k, l] = same_shift if i == k else other_shift
    return ProbabilityTable(2, values)


def honest_state(alice: PreparationParams, bob: PreparationParams) -> PureState:
    """|psi>_α |psi>_β |Φ_00>_AB with sites ordered (α, β, A, B)."""
    return tensor([
        single_site(2, alice.amplitudes),
        single_site(2, bob.amplitudes),
        bell_state(2, BellIndex(0, 0)),
    ])


def honest_state_qudit(alice: QuditPreparation, bob: QuditPreparation, d: int) -> PureState:
    if alice.dim != d or bob.dim != d:
        raise ValueError(f"both preparations must have length d={d}")
    return tensor([single_site(d, alice.coeffs), single_site(d, bob.coeffs), bell_state(d, BellIndex(0, 0))])


def entangle_measure_state(alice: PreparationParams, bob: PreparationParams, eve: PreparationParams) -> PureState:
    """Six-qubit state after Eve's CNOT (control B, target E initially |0>).

    Sites ordered (α, β, η, A, B, E); the CNOT turns |Φ_00>_AB |0>_E into
    (|000> + |111>)/sqrt 2 on (A, B, E).
    """
    return tensor([
        single_site(2, alice.amplitudes),
        single_site(2, bob.amplitudes),
        single_site(2, eve.amplitudes),
        ghz_state(2, 3),
    ])
