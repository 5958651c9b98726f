"""
Dense state vectors, tensor products and generalized Bell bases.

Amplitude ordering is site-major: the leftmost ket factor is the most
significant digit of the flat index, so |q_0 q_1 ... q_{n-1}> sits at
sum_s q_s * d**(n-1-s). That is numpy's C order for a (d,)*n reshape, and
every reshape/transpose below relies on it.

Everything here is a pure function of its inputs. The expansions in
joint_bell_coefficients* are the brute-force oracle the closed forms in
src.analytic are checked against.
"""
import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence, Tuple

import numpy as np

from src.tables import NORM_TOL, AmplitudeTable

MAX_SITES = 6
MAX_AMPLITUDES = 5 ** 6

Pairing = Sequence[Tuple[int, int]]


class BellIndex(NamedTuple):
    """(shift j, phase l) of the Bell state Φ_jl; components reduced mod d."""
    j: int
    l: int

    @classmethod
    def reduce(cls, j: int, l: int, d: int) -> "BellIndex":
        return cls(j % d, l % d)


def _num_sites(d: int, length: int) -> int:
    n = round(math.log(length, d)) if length > 1 else 0
    if n < 1 or d ** n != length:
        raise ValueError(f"{length} amplitudes is not a power of d={d}")
    return n


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state of num_sites sites, each of dimension dim_per_site."""
    dim_per_site: int
    num_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        d, n = self.dim_per_site, self.num_sites
        if d < 2:
            raise ValueError(f"dim_per_site must be >= 2, got {d}")
        if n < 1 or n > MAX_SITES:
            raise ValueError(f"num_sites must be in [1, {MAX_SITES}], got {n}")
        amplitudes = np.array(self.amplitudes, dtype=np.complex128, copy=True).reshape(-1)
        if amplitudes.size != d ** n:
            raise ValueError(f"expected {d ** n} amplitudes, got {amplitudes.size}")
        if amplitudes.size > MAX_AMPLITUDES:
            raise ValueError(f"{amplitudes.size} amplitudes exceeds the dense limit {MAX_AMPLITUDES}")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm!r})")
        amplitudes.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_amplitudes(cls, d: int, amplitudes, normalize: bool = True) -> "PureState":
        vector = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vector)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            vector = vector / norm
        return cls(d, _num_sites(d, vector.size), vector)

    @classmethod
    def basis(cls, d: int, digits: Sequence[int]) -> "PureState":
        """Computational basis state |digits[0] digits[1] ...>."""
        vector = np.zeros(d ** len(digits), dtype=np.complex128)
        index = 0
        for q in digits:
            if not 0 <= q < d:
                raise ValueError(f"basis digit {q} outside [0, {d})")
            index = index * d + q
        vector[index] = 1.0
        return cls(d, len(digits), vector)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.dim_per_site,) * self.num_sites)

    def inner(self, other: "PureState") -> complex:
        """<self|other>."""
        if other.dimension != self.dimension:
            raise ValueError("states live in different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def max_abs_diff(self, other: "PureState") -> float:
        return float(np.max(np.abs(self.amplitudes - other.amplitudes)))


def single_site(d: int, coeffs: Iterable[complex]) -> PureState:
    """One-site state sum_i coeffs[i] |i>, normalized."""
    vector = np.asarray(list(coeffs), dtype=np.complex128)
    if vector.size != d:
        raise ValueError(f"expected {d} coefficients, got {vector.size}")
    return PureState.from_amplitudes(d, vector)


def bell_state(d: int, idx: BellIndex) -> PureState:
    """(1/sqrt d) sum_q w^(l q) |q>|q + j mod d>, w = exp(2 pi i / d)."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    j, l = idx
    if not (0 <= j < d and 0 <= l < d):
        raise ValueError(f"Bell index {tuple(idx)} outside [0, {d})")
    omega = cmath.exp(2j * cmath.pi / d)
    vector = np.zeros(d * d, dtype=np.complex128)
    for q in range(d):
        vector[q * d + (q + j) % d] = omega ** ((l * q) % d) / math.sqrt(d)
    return PureState(d, 2, vector)


@lru_cache(maxsize=None)
def _bell_matrix(d: int) -> np.ndarray:
    rows = [bell_state(d, BellIndex(j, l)).amplitudes for j in range(d) for l in range(d)]
    matrix = np.array(rows)
    matrix.flags.writeable = False
    return matrix


def bell_basis_matrix(d: int) -> np.ndarray:
    """Row j*d + l holds the amplitudes of Φ_jl."""
    return _bell_matrix(d)


def tensor(states: Sequence[PureState]) -> PureState:
    """Kronecker product in site-major order."""
    if not states:
        raise ValueError("tensor needs at least one state")
    d = states[0].dim_per_site
    if any(s.dim_per_site != d for s in states):
        raise ValueError("all states must share dim_per_site")
    vector = states[0].amplitudes
    for state in states[1:]:
        vector = np.kron(vector, state.amplitudes)
    return PureState(d, sum(s.num_sites for s in states), vector)


def ghz_state(d: int, num_sites: int) -> PureState:
    """(1/sqrt d) sum_q |q q ... q>."""
    vector = np.zeros(d ** num_sites, dtype=np.complex128)
    stride = sum(d ** s for s in range(num_sites))
    vector[[q * stride for q in range(d)]] = 1.0 / math.sqrt(d)
    return PureState(d, num_sites, vector)


def _site_order(num_sites: int, pairing: Pairing, expected_pairs: int) -> list:
    pairs = [tuple(pair) for pair in pairing]
    if len(pairs) != expected_pairs or any(len(pair) != 2 for pair in pairs):
        raise ValueError(f"pairing must hold exactly {expected_pairs} site pairs, got {pairing!r}")
    order = [int(site) for pair in pairs for site in pair]
    if sorted(order) != list(range(num_sites)):
        raise ValueError(f"pairing {pairing!r} must cover sites 0..{num_sites - 1} disjointly")
    return order


def _bell_expand(state: PureState, pairing: Pairing, expected_pairs: int) -> AmplitudeTable:
    if state.num_sites != 2 * expected_pairs:
        raise ValueError(f"expected a {2 * expected_pairs}-site state, got {state.num_sites} sites")
    d = state.dim_per_site
    order = _site_order(state.num_sites, pairing, expected_pairs)
    grouped = np.transpose(state.as_tensor(), order).reshape((d * d,) * expected_pairs)
    bra = np.conj(bell_basis_matrix(d))
    if expected_pairs == 2:
        coefficients = bra @ grouped @ bra.T
    else:
        coefficients = np.einsum("ax,by,cz,xyz->abc", bra, bra, bra, grouped)
    return AmplitudeTable(d, coefficients.reshape((d,) * (2 * expected_pairs)))


def joint_bell_coefficients(state: PureState, pairing: Pairing) -> AmplitudeTable:
    """Expand a four-site state in products of Bell states on the given site pairs.

    Entry (i, j, k, l) is <Φ_ij| on pairing[0] times <Φ_kl| on pairing[1]
    applied to the state. Within a pair the first site is the left ket factor.
    """
    return _bell_expand(state, pairing, 2)


def joint_bell_coefficients_6(state: PureState, pairing: Pairing) -> AmplitudeTable:
    """Six-site version of joint_bell_coefficients, entries V_ijklmn."""
    return _bell_expand(state, pairing, 3)


def from_bell_coefficients(table: AmplitudeTable, pairing: Pairing) -> PureState:
    """Sum of coefficient times Bell-product state; inverse of the expansions above."""
    d, pairs = table.dim, table.arity
    order = _site_order(2 * pairs, pairing, pairs)
    ket = bell_basis_matrix(d)
    coefficients = table.values.reshape((d * d,) * pairs)
    if pairs == 2:
        grouped = ket.T @ coefficients @ ket
    else:
        grouped = np.einsum("ax,by,cz,abc->xyz", ket, ket, ket, coefficients)
    sites = np.transpose(grouped.reshape((d,) * (2 * pairs)), np.argsort(order))
    return PureState(d, 2 * pairs, sites.reshape(-1))
