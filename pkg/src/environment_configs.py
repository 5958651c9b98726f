# environment_configs.py - Trial budgets per run profile
"""
Contains the trial budgets for the different run profiles (smoke, standard, full).
"""
from enum import Enum
from dataclasses import dataclass


class Profile(Enum):
    """Enum for the run profiles."""
    SMOKE = "smoke"
    STANDARD = "standard"
    FULL = "full"


@dataclass
class ProfileConfig:
    """Trial counts used by verify and sweep for one profile."""
    qubit_trials: int
    qudit_trials: int
    entangle_trials: int
    sweep_trials: int

    @property
    def is_acceptance(self):
        """Returns True if the profile reaches the acceptance trial counts."""
        return self.qubit_trials >= 100 and self.qudit_trials >= 25 and self.entangle_trials >= 50


PROFILE_CONFIGS = {
    Profile.SMOKE: ProfileConfig(qubit_trials=10, qudit_trials=3, entangle_trials=5, sweep_trials=10),
    Profile.STANDARD: ProfileConfig(qubit_trials=100, qudit_trials=25, entangle_trials=50, sweep_trials=50),
    Profile.FULL: ProfileConfig(qubit_trials=500, qudit_trials=100, entangle_trials=200, sweep_trials=200),
}


def get_profile_config(profile_name: str) -> ProfileConfig:
    """Get the configuration for a given profile name."""
    profile = Profile(profile_name)
    return PROFILE_CONFIGS[profile]
