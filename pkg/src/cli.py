"""
Command-line entry point: verify, simulate, attack-demo, sweep, schema.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
Every report embeds a RunManifest; file names in it are relative to --out so
two runs into different directories still produce identical reports.
"""
import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src import __version__
from src.adversary import AttackConfig, AttackKind, EveTranscript, attacked_probabilities, eve_recovered_values
from src.analytic import PreparationParams, honest_probabilities
from src.channel import ChannelConfig
from src.config import SimulatorSettings, configure_logging, source_date_epoch
from src.environment_configs import Profile, get_profile_config
from src.parameter_factory import AttackFactory, seed_factories
from src.protocol import GroupResult, ProtocolConfig, run_group, run_session
from src.sweeps import SCHEMA_VERSION, SWEEP_AXES, rows_to_csv, rows_to_records, run_sweep
from src.verification import DEFAULT_DIMS, ClosedForms, max_deviation, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

GROUP_COLUMNS = (
    "schema_version", "index", "theta_a", "phi_a", "theta_b", "phi_b", "n_sent", "n_received",
    "p1010", "p1011", "p1110", "p1111", "accuracy_check", "eavesdrop_check",
    "phi_degeneracy_check", "digit_comparison", "alice_view", "bob_view", "kept_digits",
    "reliable_digits_theta_a", "reliable_digits_theta_b", "reasons",
)

# Alice and Bob in the attack demo: the (9/128, 3/128) conclusive fixture.
DEMO_ALICE = PreparationParams(theta=math.pi / 6, phi=math.pi / 6)
DEMO_BOB = PreparationParams(theta=math.pi / 3, phi=math.pi / 6)


class UsageError(Exception):
    """Bad command-line input; reported with exit code 2."""


class ConfigFile(BaseModel):
    """On-disk run configuration: protocol fields plus channel, attack and seed."""
    model_config = ConfigDict(extra="forbid")

    protocol: Dict[str, Any] = Field(default_factory=dict)
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    attack: AttackConfig = Field(default_factory=AttackConfig)
    seed: Optional[int] = Field(default=None, ge=0)

    def to_protocol_config(self, settings: SimulatorSettings, seed_override: Optional[int] = None) -> ProtocolConfig:
        data = dict(self.protocol)
        for nested in ("channel", "attack", "master_seed"):
            if nested in data:
                raise UsageError(f"config error: protocol.{nested}: set it at the top level")
        data.setdefault("workers", settings.workers)
        data["channel"] = self.channel
        data["attack"] = self.attack
        if seed_override is not None:
            data["master_seed"] = seed_override
        elif self.seed is not None:
            data["master_seed"] = self.seed
        else:
            data["master_seed"] = settings.master_seed
        try:
            return ProtocolConfig.model_validate(data)
        except ValidationError as exc:
            raise UsageError(_describe(exc, prefix="protocol")) from exc


class RunManifest(BaseModel):
    tool_version: str = __version__
    command: str
    master_seed: int
    timestamp: Optional[str] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)


def _describe(exc: ValidationError, prefix: str = "") -> str:
    error = exc.errors()[0]
    path = ".".join(str(part) for part in ((prefix,) if prefix else ()) + tuple(error["loc"]))
    return f"config error: {path or '<root>'}: {error['msg']}"


def load_config(path: str, settings: SimulatorSettings, seed_override: Optional[int] = None) -> ProtocolConfig:
    config_path = Path(path)
    if not config_path.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        raw = json.loads(config_path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"config error: <root>: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    try:
        config_file = ConfigFile.model_validate(raw)
    except ValidationError as exc:
        raise UsageError(_describe(exc)) from exc
    return config_file.to_protocol_config(settings, seed_override)


def _write(out_dir: Path, name: str, text: str) -> str:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)
    logger.info("wrote %s", out_dir / name)
    return name


def _dump(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _manifest(command: str, seed: int, config: Dict[str, Any], outputs: Sequence[str]) -> Dict[str, Any]:
    return RunManifest(
        command=command, master_seed=seed, timestamp=source_date_epoch(), config=config, outputs=list(outputs)
    ).model_dump(mode="json")


def group_rows(groups: Sequence[GroupResult]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(GROUP_COLUMNS)
    for g in groups:
        quadruple = g.quadruple or (float("nan"),) * 4
        verdict = {name: g.verdicts[name].passed if name in g.verdicts else "" for name in GROUP_COLUMNS[12:16]}
        writer.writerow([
            SCHEMA_VERSION, g.index, repr(g.alice.theta), repr(g.alice.phi), repr(g.bob.theta), repr(g.bob.phi),
            g.n_sent, g.n_received, *(repr(float(p)) for p in quadruple), *verdict.values(),
            g.alice_view, g.bob_view, g.kept_digits,
            g.reliable_digits.get("cos_theta_a", ""), g.reliable_digits.get("cos_theta_b", ""), ";".join(g.reasons),
        ])
    return buffer.getvalue()


def cmd_verify(
    dims: Sequence[int], profile: str, seed: int, out_dir: Path, forms: Optional[ClosedForms] = None
) -> int:
    profile_config = get_profile_config(profile)
    if not profile_config.is_acceptance:
        logger.warning("profile %s runs fewer trials than the acceptance counts", profile)
    report = run_verification(profile_config, seed, dims, forms)
    for result in report.results:
        status = "ok" if result.passed else "FAIL"
        print(f"{result.name:<28} trials={result.trials:<4} max_dev={result.max_deviation:.3e}  {status}")
    print(f"max deviation {max_deviation(report):.3e}: {'all suites pass' if report.passed else 'FAILED'}")
    name = "verify_report.json"
    payload = {
        "manifest": _manifest("verify", seed, {"dims": list(dims), "profile": profile}, [name]),
        "acceptance_counts": profile_config.is_acceptance,
        **report.as_dict(),
    }
    _write(out_dir, name, _dump(payload))
    return EXIT_OK if report.passed else EXIT_FAILURE


def cmd_simulate(cfg: ProtocolConfig, out_dir: Path) -> int:
    report = run_session(cfg)
    names = ["session_report.json", "groups.csv"]
    payload = {
        "manifest": _manifest("simulate", cfg.master_seed, cfg.model_dump(mode="json"), names),
        "final_key": report.final_key,
        "key_length": report.key_length,
        "alice_key": report.alice_key,
        "bob_key": report.bob_key,
        "key_disagreement": report.key_disagreement,
        "efficiency": report.efficiency,
        "total_pairs_sent": report.total_pairs_sent,
        "groups_passed": report.groups_passed,
        "groups_discarded": report.groups_discarded,
        "discard_reasons": report.discard_reasons,
        "groups": [g.model_dump(mode="json") for g in report.groups],
    }
    _write(out_dir, names[0], _dump(payload))
    _write(out_dir, names[1], group_rows(report.groups))
    print(f"key: {report.key_length} digits from {report.total_pairs_sent} pairs "
          f"(efficiency {report.efficiency:.3g}); {report.groups_discarded} of {cfg.num_groups} groups discarded")
    for reason, count in report.discard_reasons.items():
        print(f"  {reason}: {count}")
    return EXIT_OK


def attack_demo(kind: AttackKind, fraction: float, seed: int, pairs: int) -> Dict[str, Any]:
    """Honest and attacked tables side by side for the demo parameters."""
    seed_factories(seed)
    attack = AttackFactory.create(kind, fraction) if kind is not AttackKind.NONE else AttackFactory.create_honest()
    honest = honest_probabilities(DEMO_ALICE, DEMO_BOB)
    attacked = attacked_probabilities(honest, attack, DEMO_ALICE, DEMO_BOB)

    def verdicts(attack_cfg: AttackConfig) -> Dict[str, bool]:
        cfg = ProtocolConfig(group_size=pairs, num_groups=1, attack=attack_cfg, exact_probabilities=True,
                             master_seed=seed)
        result = run_group(DEMO_ALICE, DEMO_BOB, cfg, seed)
        return {name: verdict.passed for name, verdict in result.verdicts.items()}

    eve = None
    if kind is AttackKind.INTERCEPT_RESEND:
        estimate = eve_recovered_values(attack, EveTranscript.exact(attack, DEMO_ALICE, DEMO_BOB))
        eve = {
            "reliable": estimate.reliable,
            "reason": estimate.reason,
            "values": list(estimate.as_tuple()) if estimate.alice_values else None,
        }
    return {
        "alice": DEMO_ALICE.model_dump(),
        "bob": DEMO_BOB.model_dump(),
        "attack": attack.model_dump(mode="json"),
        "honest_table": honest.as_dict(),
        "attacked_table": attacked.as_dict(),
        "honest_quadruple": honest.conclusive().as_dict(),
        "attacked_quadruple": attacked.conclusive().as_dict(),
        "eve_estimate": eve,
        "verdicts": {"honest": verdicts(AttackFactory.create_honest()), "attacked": verdicts(attack)},
    }


def cmd_attack_demo(kind: str, fraction: float, seed: int, pairs: int, out_dir: Path, fmt: str) -> int:
    try:
        attack_kind = AttackKind(kind)
        demo = attack_demo(attack_kind, fraction, seed, pairs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if fmt == "csv":
        name = "attack_demo.csv"
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("schema_version", "outcome", "honest", "attacked"))
        for outcome, value in demo["honest_table"].items():
            writer.writerow((SCHEMA_VERSION, outcome, repr(value), repr(demo["attacked_table"][outcome])))
        text = buffer.getvalue()
    else:
        name = "attack_demo.json"
        text = _dump({"manifest": _manifest("attack-demo", seed, {"kind": kind, "fraction": fraction,
                                                                  "pairs": pairs}, [name]), **demo})
    _write(out_dir, name, text)
    print(f"{'outcome':<8} {'honest':>10} {'attacked':>10}")
    for outcome in ("1010", "1011", "1110", "1111"):
        print(f"{outcome:<8} {demo['honest_table'][outcome]:>10.6f} {demo['attacked_table'][outcome]:>10.6f}")
    for side, checks in demo["verdicts"].items():
        print(f"{side}: " + ", ".join(f"{k}={'pass' if v else 'fail'}" for k, v in checks.items()))
    if demo["eve_estimate"] and demo["eve_estimate"]["values"]:
        print("eve estimate (cos theta_a, cos phi_a, cos theta_b, cos phi_b): "
              + ", ".join(f"{v:.4f}" for v in demo["eve_estimate"]["values"]))
    return EXIT_OK


def parse_values(text: str) -> List[float]:
    """"a,b,c" or "start:stop:step" (stop included when it lands on the grid)."""
    text = text.strip()
    if not text:
        raise UsageError("sweep range is empty")
    if ":" in text:
        try:
            start, stop, step = (float(part) for part in text.split(":"))
        except ValueError as exc:
            raise UsageError(f"range must be start:stop:step, got {text!r}") from exc
        if step <= 0 or stop < start:
            raise UsageError(f"range {text!r} is empty")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [float(v) for v in np.round(start + step * np.arange(count), 12)]
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"sweep values must be numbers, got {text!r}") from exc


def with_alpha(base: ProtocolConfig, alpha: float) -> ProtocolConfig:
    data = base.model_dump()
    data["channel"]["alpha"] = alpha
    try:
        return ProtocolConfig.model_validate(data)
    except ValidationError as exc:
        raise UsageError(_describe(exc)) from exc


def cmd_sweep(base: ProtocolConfig, axis: str, values: Sequence[float], trials: int, out_dir: Path, fmt: str) -> int:
    try:
        rows = run_sweep(base, axis, values, trials)
    except (ValueError, ValidationError) as exc:
        raise UsageError(str(exc)) from exc
    if fmt == "csv":
        name = _write(out_dir, f"sweep_{axis}.csv", rows_to_csv(rows))
    else:
        name = f"sweep_{axis}.json"
        manifest = _manifest("sweep", base.master_seed, {"axis": axis, "values": list(values), "trials": trials,
                                                         "base": base.model_dump(mode="json")}, [name])
        _write(out_dir, name, _dump({"manifest": manifest, "rows": rows_to_records(rows)}))
    print(rows_to_csv(rows), end="")
    return EXIT_OK


def cmd_schema(out: Optional[Path]) -> int:
    schema = {
        "title": "Run configuration",
        "file": ConfigFile.model_json_schema(),
        "protocol": ProtocolConfig.model_json_schema(),
    }
    text = _dump(schema)
    if out is not None:
        _write(out, "schema.json", text)
    print(text, end="")
    return EXIT_OK


def create_cli_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qndp", description="Two-way quantum number distribution simulator.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None,
                        help="Logging level (default: QNDP_LOG_LEVEL).")
    parser.add_argument("--out", default=None, help="Output directory (default: QNDP_OUT_DIR).")
    parser.add_argument("--seed", type=int, default=None, help="Master seed; overrides config and QNDP_SEED.")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Closed forms against brute-force Bell expansions.")
    verify.add_argument("--dims", default=",".join(str(d) for d in DEFAULT_DIMS), help="Qudit dimensions.")
    verify.add_argument("--profile", choices=[p.value for p in Profile], default=None)

    simulate = sub.add_parser("simulate", help="Run a full session from a config file.")
    simulate.add_argument("--config", required=True)

    demo = sub.add_parser("attack-demo", help="Honest vs attacked statistics side by side.")
    demo.add_argument("--kind", choices=[k.value for k in AttackKind], default=AttackKind.INTERCEPT_RESEND.value)
    demo.add_argument("--fraction", type=float, default=1.0)
    demo.add_argument("--pairs", type=int, default=1000, help="Group size used for the check thresholds.")
    demo.add_argument("--format", choices=["json", "csv"], default="json")

    sweep = sub.add_parser("sweep", help="Sweep one axis and emit a table.")
    sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sweep.add_argument("--values", required=True, help='"a,b,c" or "start:stop:step".')
    sweep.add_argument("--trials", type=int, default=None, help="Groups per point (default: profile).")
    sweep.add_argument("--config", default=None, help="Base config (default: built-in defaults).")
    sweep.add_argument("--alpha", type=float, default=None, help="Fiber attenuation in dB/km (overrides the config).")
    sweep.add_argument("--profile", choices=[p.value for p in Profile], default=None)
    sweep.add_argument("--format", choices=["json", "csv"], default="csv")

    sub.add_parser("schema", help="Print the JSON schema of run configs.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_cli_parser()
    args = parser.parse_args(argv)
    settings = SimulatorSettings.from_env()
    configure_logging(args.log_level or settings.log_level)
    out_dir = Path(args.out or settings.out_dir)
    seed = args.seed if args.seed is not None else settings.master_seed

    try:
        if args.command == "verify":
            try:
                dims = [int(d) for d in args.dims.split(",") if d.strip()]
            except ValueError as exc:
                raise UsageError(f"--dims must be a comma-separated list of integers, got {args.dims!r}") from exc
            if not dims or min(dims) < 2:
                raise UsageError("--dims needs dimensions >= 2")
            return cmd_verify(dims, args.profile or settings.profile, seed, out_dir)
        if args.command == "simulate":
            return cmd_simulate(load_config(args.config, settings, args.seed), out_dir)
        if args.command == "attack-demo":
            return cmd_attack_demo(args.kind, args.fraction, seed, args.pairs, out_dir, args.format)
        if args.command == "sweep":
            if args.config:
                base = load_config(args.config, settings, args.seed)
            else:
                base = ProtocolConfig(master_seed=seed, workers=settings.workers)
            if args.alpha is not None:
                base = with_alpha(base, args.alpha)
            trials = args.trials or get_profile_config(args.profile or settings.profile).sweep_trials
            return cmd_sweep(base, args.axis, parse_values(args.values), trials, out_dir, args.format)
        return cmd_schema(Path(args.out) if args.out else None)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
