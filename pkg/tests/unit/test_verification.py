# test_verification.py
"""
Unit tests for the brute-force oracle suites.
"""
import pytest

from src.environment_configs import get_profile_config
from src.verification import ClosedForms, max_deviation, run_verification, verify_qudit
from tests.helper_functions import sign_flipped_qubit


@pytest.mark.unit
@pytest.mark.oracle
class TestVerification:

    def test_smoke_profile_passes(self):
        report = run_verification(get_profile_config("smoke"), seed=1, dims=(2, 3))
        assert report.passed
        assert max_deviation(report) < 1e-12
        names = [r.name for r in report.results]
        assert names == [
            "qubit_amplitudes", "conclusive_probabilities", "qudit_amplitudes_d2",
            "qudit_amplitudes_d3", "entangle_measure", "intercept_resend",
        ]

    def test_sign_error_is_caught(self):
        report = run_verification(
            get_profile_config("smoke"), seed=1, dims=(2,), forms=ClosedForms(qubit=sign_flipped_qubit)
        )
        assert not report.passed
        failed = [r.name for r in report.results if not r.passed]
        assert failed == ["qubit_amplitudes"]

    def test_report_has_no_timings(self):
        report = run_verification(get_profile_config("smoke"), seed=1, dims=(2,))
        assert "seconds" not in report.as_dict()["suites"][0]

    def test_dimension_below_two_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            run_verification(get_profile_config("smoke"), seed=1, dims=(1,))

    def test_qudit_suite_at_d6(self):
        assert verify_qudit(6, 2, ClosedForms()).passed
