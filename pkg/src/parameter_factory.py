"""
Factories for preparation parameters, qudit coefficients and attack configs.

Faker supplies the randomness, so seeding the shared instance with
``seed_factories`` makes every batch reproducible.
"""
import cmath
import math
from typing import List

import numpy as np
from faker import Faker

from src.adversary import AttackConfig, AttackKind
from src.analytic import HALF_PI, QUARTER_PI, THETA_MARGIN, PreparationParams, QuditPreparation

fake = Faker()


def seed_factories(seed: int) -> None:
    fake.seed_instance(seed)


class PreparationFactory:
    """Admissible (theta, phi) pairs: open ranges, theta away from pi/4."""
    @staticmethod
    def create(theta_margin: float = THETA_MARGIN, **overrides) -> PreparationParams:
        while True:
            theta = fake.random.uniform(theta_margin, HALF_PI - theta_margin)
            if abs(theta - QUARTER_PI) >= theta_margin:
                break
        data = {"theta": theta, "phi": fake.random.uniform(1e-6, HALF_PI - 1e-6)}
        data.update(overrides)
        return PreparationParams(**data)

    @staticmethod
    def create_batch(n: int, theta_margin: float = THETA_MARGIN) -> List[PreparationParams]:
        return [PreparationFactory.create(theta_margin) for _ in range(n)]

    @staticmethod
    def create_pair(**overrides):
        """Alice and Bob parameters for one group."""
        return PreparationFactory.create(**overrides), PreparationFactory.create(**overrides)

    @staticmethod
    def create_any(**overrides) -> PreparationParams:
        """Anywhere in the closed ranges, admissible or not."""
        data = {"theta": fake.random.uniform(0.0, HALF_PI), "phi": fake.random.uniform(0.0, HALF_PI)}
        data.update(overrides)
        return PreparationParams(**data)


class QuditFactory:
    """Random unit-norm complex coefficient vectors of length d."""
    @staticmethod
    def create(d: int) -> QuditPreparation:
        magnitudes = [fake.random.uniform(0.05, 1.0) for _ in range(d)]
        phases = [fake.random.uniform(0.0, 2.0 * math.pi) for _ in range(d)]
        coeffs = np.array([r * cmath.exp(1j * p) for r, p in zip(magnitudes, phases)])
        return QuditPreparation.normalized(coeffs)

    @staticmethod
    def create_batch(n: int, d: int) -> List[QuditPreparation]:
        return [QuditFactory.create(d) for _ in range(n)]


class AttackFactory:
    @staticmethod
    def create(kind: AttackKind = AttackKind.INTERCEPT_RESEND, fraction: float = 1.0, **overrides) -> AttackConfig:
        data = {"kind": kind, "fraction": fraction}
        if kind is AttackKind.INTERCEPT_RESEND:
            data["eve_gamma"] = PreparationFactory.create()
            data["eve_delta"] = PreparationFactory.create()
        elif kind is AttackKind.ENTANGLE_MEASURE:
            data["eve_eta"] = PreparationFactory.create()
        data.update(overrides)
        return AttackConfig(**data)

    @staticmethod
    def create_honest() -> AttackConfig:
        return AttackConfig(kind=AttackKind.NONE)
