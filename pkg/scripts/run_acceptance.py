#!/usr/bin/env python3
"""
Acceptance workflow: oracle verification, the shipped configs, and a
byte-for-byte determinism check of two identical simulate runs, then the
fast test suites with HTML and JSON reports under reports/.
"""
import filecmp
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ("honest.json", "honest_sampled.json", "intercept.json", "entangle.json")
REPORTS = ("session_report.json", "groups.csv")


def cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "src.cli", *args], cwd=ROOT, capture_output=True, text=True
    )


def main():
    print("Starting acceptance workflow...")

    print("\n1. Verifying closed forms against brute force...")
    with tempfile.TemporaryDirectory() as out:
        result = cli("--out", out, "verify", "--profile", "standard")
    print(result.stdout)
    if result.returncode != 0:
        print(f"Verification failed (exit {result.returncode}): {result.stderr}")
        return 1

    print("\n2. Simulating the shipped configs twice each...")
    with tempfile.TemporaryDirectory() as scratch:
        for name in CONFIGS:
            runs = [Path(scratch) / name / run for run in ("first", "second")]
            for out in runs:
                result = cli("--out", str(out), "simulate", "--config", str(ROOT / "configs" / name))
                if result.returncode != 0:
                    print(f"simulate {name} failed (exit {result.returncode}): {result.stderr}")
                    return 1
            print(f"{name}: {result.stdout.splitlines()[0]}")

            print(f"\n3. Comparing {name} reports byte for byte...")
            for report in REPORTS:
                if not filecmp.cmp(runs[0] / report, runs[1] / report, shallow=False):
                    print(f"{name}: {report} differs between identical runs")
                    return 1

    print("\n4. Running the fast suites with HTML and JSON reports...")
    result = subprocess.run(
        [
            sys.executable, "-m", "pytest", "-m", "not slow",
            "--html=reports/report.html", "--self-contained-html",
            "--json-report", "--json-report-file=reports/report.json",
            "--metadata", "Workflow", "acceptance",
        ],
        cwd=ROOT,
    )
    if result.returncode != 0:
        print(f"Test suites failed (exit {result.returncode}); see reports/report.html")
        return 1

    print("\nAcceptance workflow complete.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
