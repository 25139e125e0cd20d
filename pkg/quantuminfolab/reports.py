"""
Experiment reports and their JSON/CSV serialization.

A check carries a signed margin: the slack of the asserted relation,
negative when it is violated. Equalities use -|difference|.
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("step", "coupling_pair", "S_T_coarse")


@dataclass(frozen=True)
class CheckResult:
    margin: float
    tolerance: float
    description: str = ""

    def __post_init__(self):
        if not math.isfinite(self.margin):
            raise ValueError(
                f"Check margin must be finite, got {self.margin}."
            )
        object.__setattr__(self, "margin", float(self.margin))

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    def to_dict(self) -> dict:
        return {
            "margin": self.margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "description": self.description,
        }


def inequality(
    lhs: float, rhs: float, tolerance: float, description: str = ""
) -> CheckResult:
    """Check lhs >= rhs."""
    return CheckResult(float(lhs) - float(rhs), tolerance, description)


def equality(
    lhs: float, rhs: float, tolerance: float, description: str = ""
) -> CheckResult:
    """Check lhs == rhs."""
    return CheckResult(-abs(float(lhs) - float(rhs)), tolerance, description)


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    coupling_pair: Optional[Tuple[str, str]]
    s_t: float

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "coupling_pair": list(self.coupling_pair)
            if self.coupling_pair
            else None,
            "S_T_coarse": self.s_t,
        }


@dataclass
class ExperimentReport:
    name: str
    values: Dict[str, float] = field(default_factory=dict)
    checks: Dict[str, CheckResult] = field(default_factory=dict)
    seed: Optional[int] = None
    tolerance: float = 1e-9
    trajectory: List[TrajectoryPoint] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    @property
    def worst_margin(self) -> Optional[float]:
        if not self.checks:
            return None
        return min(check.margin for check in self.checks.values())

    def to_dict(self) -> dict:
        payload = {
            "experiment": self.name,
            "passed": self.passed,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "values": {k: float(v) for k, v in self.values.items()},
            "checks": {k: c.to_dict() for k, c in self.checks.items()},
        }
        if self.trajectory:
            payload["trajectory"] = [p.to_dict() for p in self.trajectory]
        return payload


def to_json_bytes(payload) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()


def _atomic_write(path: Union[str, Path], data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        dir=path.parent, prefix=f".{path.name}.", delete=False
    )
    try:
        with handle:
            handle.write(data)
        os.replace(handle.name, path)
    except Exception:
        os.unlink(handle.name)
        raise


def write_json_atomic(path: Union[str, Path], payload) -> None:
    """
    Write a JSON document in one step.
    :param path: Destination file.
    :param payload: JSON-serializable object.
    """
    _atomic_write(path, to_json_bytes(payload))
    logger.info(f"Successfully wrote report: '{path}'.")


def trajectory_csv(trajectory: List[TrajectoryPoint]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for point in trajectory:
        pair = "-".join(point.coupling_pair) if point.coupling_pair else ""
        writer.writerow([point.step, pair, repr(point.s_t)])
    return buffer.getvalue()


def write_trajectory_csv(
    path: Union[str, Path], trajectory: List[TrajectoryPoint]
) -> None:
    _atomic_write(path, trajectory_csv(trajectory).encode())
    logger.info(
        f"Successfully wrote {len(trajectory)} trajectory rows to '{path}'."
    )
