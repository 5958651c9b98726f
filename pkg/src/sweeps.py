"""
Parameter sweeps over one axis of a base ProtocolConfig.

Every point reuses the base master seed, so point k and point k+1 see the
same per-group parameter draws and differ only in the swept quantity.
"""
import csv
import io
import logging
from dataclasses import asdict, dataclass
from typing import List, Sequence

import numpy as np

from src.adversary import AttackKind
from src.channel import ChannelConfig, transmittance
from src.estimator import digits_of
from src.protocol import GroupResult, ProtocolConfig, run_session

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SWEEP_AXES = ("n", "error_rate", "fraction", "distance", "digits")
CSV_COLUMNS = (
    "schema_version",
    "axis",
    "value",
    "trials",
    "transmittance",
    "recovery_error_median",
    "digit_reliability",
    "reliable_digits_mean",
    "group_agreement",
    "discard_rate",
    "key_rate",
)


@dataclass(frozen=True)
class SweepRow:
    """One sweep point.

    recovery_error_median: median |recovered cos theta - true cos theta| over
    both recovery directions. digit_reliability: fraction of those recoveries
    whose first D digits match the source. reliable_digits_mean: mean count of
    leading digits the group statistics guarantee per recovery. group_agreement: fraction of groups
    whose two digit views agree everywhere.
    """
    schema_version: int
    axis: str
    value: float
    trials: int
    transmittance: float
    recovery_error_median: float
    digit_reliability: float
    reliable_digits_mean: float
    group_agreement: float
    discard_rate: float
    key_rate: float


def config_for_point(base: ProtocolConfig, axis: str, value: float, trials: int) -> ProtocolConfig:
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    data = base.model_dump()
    data["num_groups"] = trials
    if axis == "n":
        data["group_size"] = int(value)
    elif axis == "error_rate":
        data["channel"]["error_rate"] = float(value)
    elif axis == "fraction":
        if base.attack.kind is AttackKind.NONE:
            raise ValueError("a fraction sweep needs an attack kind in the base config")
        data["attack"]["fraction"] = float(value)
    elif axis == "distance":
        if base.channel.alpha == 0.0:
            raise ValueError("a distance sweep needs channel.alpha > 0")
        data["channel"]["length_km"] = float(value)
    else:
        digits = int(value)
        data["digits_per_value"] = digits
        # one group per D-digit target: n = 10^(2D) pairs
        data["group_size"] = 10 ** (2 * digits)
        data["digits_sacrificed_per_group"] = min(base.digits_sacrificed_per_group, 4 * digits)
    return ProtocolConfig.model_validate(data)


def _recovery_pairs(groups: Sequence[GroupResult]):
    for g in groups:
        if g.recovered_by_alice is not None:
            yield g.recovered_by_alice.cos_theta, g.bob.cos_theta
        if g.recovered_by_bob is not None:
            yield g.recovered_by_bob.cos_theta, g.alice.cos_theta


def summarize_point(cfg: ProtocolConfig, axis: str, value: float) -> SweepRow:
    report = run_session(cfg)
    groups = report.groups
    digits = cfg.digits_per_value
    pairs = list(_recovery_pairs(groups))
    errors = [abs(recovered - truth) for recovered, truth in pairs]
    matches = [digits_of(recovered, digits) == digits_of(truth, digits) for recovered, truth in pairs]
    # a group with nothing received contributes two failed recoveries
    expected = 2 * len(groups)
    agreeing = sum(1 for g in groups if g.alice_view and g.alice_view == g.bob_view)
    guaranteed = [count for g in groups for count in g.reliable_digits.values()]
    count = max(len(groups), 1)
    return SweepRow(
        schema_version=SCHEMA_VERSION,
        axis=axis,
        value=float(value),
        trials=len(groups),
        transmittance=transmittance(cfg.channel),
        recovery_error_median=float(np.median(errors)) if errors else float("nan"),
        digit_reliability=sum(matches) / expected if expected else 0.0,
        reliable_digits_mean=float(np.mean(guaranteed)) if guaranteed else 0.0,
        group_agreement=agreeing / count,
        discard_rate=report.groups_discarded / count,
        key_rate=report.efficiency,
    )


def run_sweep(base: ProtocolConfig, axis: str, values: Sequence[float], trials: int) -> List[SweepRow]:
    if not len(values):
        raise ValueError("sweep range is empty")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rows = []
    for value in values:
        cfg = config_for_point(base, axis, value, trials)
        row = summarize_point(cfg, axis, value)
        logger.info(
            "%s=%g: median error %.4g, reliability %.3f, discard %.3f",
            axis, value, row.recovery_error_median, row.digit_reliability, row.discard_rate,
        )
        rows.append(row)
    return rows


def transmittance_curve(alpha: float, distances: Sequence[float], fixed_loss_db: float = 0.0) -> List[float]:
    """Transmittance at each distance without running any groups."""
    return [
        transmittance(ChannelConfig(alpha=alpha, length_km=d, fixed_loss_db=fixed_loss_db)) for d in distances
    ]


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in asdict(row).items()})
    return buffer.getvalue()


def rows_to_records(rows: Sequence[SweepRow]) -> List[dict]:
    return [asdict(row) for row in rows]
