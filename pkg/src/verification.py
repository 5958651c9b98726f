"""
Brute-force oracle suites: every closed form against the Bell-basis expansion
of the state it describes.

The closed forms are injected through ``ClosedForms`` so a deliberately broken
implementation can be checked to fail the suite.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

from src.adversary import AttackConfig, AttackKind, full_attack_table
from src.analytic import (
    ENTANGLE_PAIRING,
    HONEST_PAIRING,
    closed_form_v_qubit,
    closed_form_v_qudit,
    conclusive_probabilities,
    entangle_measure_probabilities,
    entangle_measure_state,
    honest_state,
    honest_state_qudit,
)
from src.environment_configs import ProfileConfig
from src.parameter_factory import PreparationFactory, QuditFactory, seed_factories
from src.qmath import BellIndex, bell_state, joint_bell_coefficients, joint_bell_coefficients_6, single_site, tensor

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-12
DEFAULT_DIMS = (2, 3, 4, 5)

# Sites (α, β, A, B, E, F): Φ_00 on A-B and on Eve's E-F; Alice measures
# (α, A), Bob (β, F), Eve (B, E).
INTERCEPT_PAIRING = ((0, 2), (1, 5), (3, 4))


@dataclass
class ClosedForms:
    qubit: Callable = closed_form_v_qubit
    qudit: Callable = closed_form_v_qudit
    conclusive: Callable = conclusive_probabilities
    entangle: Callable = entangle_measure_probabilities
    intercept: Callable = full_attack_table


@dataclass
class OracleResult:
    name: str
    trials: int
    max_deviation: float
    seconds: float
    tolerance: float = ORACLE_TOL

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance

    def as_dict(self) -> Dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class VerificationReport:
    results: List[OracleResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self) -> Dict:
        return {"passed": self.passed, "suites": [r.as_dict() for r in self.results]}


def _timed(name: str, trials: int, deviations) -> OracleResult:
    start = time.perf_counter()
    worst = max((float(d) for d in deviations), default=0.0)
    result = OracleResult(name, trials, worst, time.perf_counter() - start)
    logger.info("%s: %d trials, max deviation %.3e", name, trials, worst)
    return result


def verify_qubit(trials: int, forms: ClosedForms) -> OracleResult:
    """Closed-form V_ijkl against the expansion of |psi_a>|psi_b>|Φ_00>."""
    def deviations():
        for _ in range(trials):
            alice, bob = PreparationFactory.create_any(), PreparationFactory.create_any()
            brute = joint_bell_coefficients(honest_state(alice, bob), HONEST_PAIRING)
            yield forms.qubit(alice, bob).max_abs_diff(brute)
    return _timed("qubit_amplitudes", trials, deviations())


def verify_conclusive(trials: int, forms: ClosedForms) -> OracleResult:
    """The theta/phi form of the conclusive quadruple against |V|^2."""
    def deviations():
        for _ in range(trials):
            alice, bob = PreparationFactory.create_any(), PreparationFactory.create_any()
            brute = joint_bell_coefficients(honest_state(alice, bob), HONEST_PAIRING).probabilities()
            quadruple = forms.conclusive(alice, bob)
            yield max(abs(a - b) for a, b in zip(quadruple, brute.conclusive()))
    return _timed("conclusive_probabilities", trials, deviations())


def verify_qudit(d: int, trials: int, forms: ClosedForms) -> OracleResult:
    """Magnitudes of the generalized closed form against brute force in dimension d."""
    def deviations():
        for _ in range(trials):
            alice, bob = QuditFactory.create(d), QuditFactory.create(d)
            brute = joint_bell_coefficients(honest_state_qudit(alice, bob, d), HONEST_PAIRING)
            yield forms.qudit(alice, bob, d).max_magnitude_diff(brute)
    return _timed(f"qudit_amplitudes_d{d}", trials, deviations())


def verify_entangle(trials: int, forms: ClosedForms) -> OracleResult:
    """Entangle-measure table against the six-site marginals, and its independence of Eve's state."""
    def deviations():
        for _ in range(trials):
            alice, bob = PreparationFactory.create_any(), PreparationFactory.create_any()
            eve, other_eve = PreparationFactory.create_any(), PreparationFactory.create_any()
            brute = joint_bell_coefficients_6(entangle_measure_state(alice, bob, eve), ENTANGLE_PAIRING)
            closed = forms.entangle(alice, bob, eve)
            yield closed.max_abs_diff(brute.probabilities())
            yield closed.max_abs_diff(forms.entangle(alice, bob, other_eve))
    return _timed("entangle_measure", trials, deviations())


def verify_intercept(trials: int, forms: ClosedForms) -> OracleResult:
    """Uniform 1/16 table against the marginal over Eve's Bell outcome."""
    resend = tensor([bell_state(2, BellIndex(0, 0)), bell_state(2, BellIndex(0, 0))])

    def deviations():
        for _ in range(trials):
            alice, bob = PreparationFactory.create_any(), PreparationFactory.create_any()
            attack = AttackConfig(
                kind=AttackKind.INTERCEPT_RESEND,
                eve_gamma=PreparationFactory.create_any(),
                eve_delta=PreparationFactory.create_any(),
            )
            state = tensor([single_site(2, alice.amplitudes), single_site(2, bob.amplitudes), resend])
            brute = joint_bell_coefficients_6(state, INTERCEPT_PAIRING).probabilities()
            yield forms.intercept(attack, alice, bob).max_abs_diff(brute)
    return _timed("intercept_resend", trials, deviations())


def run_verification(
    profile: ProfileConfig,
    seed: int,
    dims: Sequence[int] = DEFAULT_DIMS,
    forms: ClosedForms = None,
) -> VerificationReport:
    forms = forms or ClosedForms()
    for d in dims:
        if d < 2:
            raise ValueError(f"dimension must be >= 2, got {d}")
    seed_factories(seed)
    report = VerificationReport()
    report.results.append(verify_qubit(profile.qubit_trials, forms))
    report.results.append(verify_conclusive(profile.qubit_trials, forms))
    for d in dims:
        report.results.append(verify_qudit(d, profile.qudit_trials, forms))
    report.results.append(verify_entangle(profile.entangle_trials, forms))
    report.results.append(verify_intercept(profile.entangle_trials, forms))
    failed = [r.name for r in report.results if not r.passed]
    if failed:
        logger.warning("oracle suites failed: %s", ", ".join(failed))
    return report


def max_deviation(report: VerificationReport) -> float:
    return max((r.max_deviation for r in report.results), default=0.0)
