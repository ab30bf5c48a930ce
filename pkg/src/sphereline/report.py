"""Machine-readable run reports with reproducible serialization.

Field order is fixed by construction order; floats serialize as Python's
shortest round-trip decimals.  The timestamp honors SOURCE_DATE_EPOCH so
that two runs with identical configuration produce byte-identical files.
"""

from __future__ import annotations

import datetime
import io
import json
import os
from dataclasses import dataclass, field

VERSION = "0.1.0"

CSV_HEADER = "name,kind,lhs,rhs,residual,tolerance,pass"


@dataclass
class CheckReport:
    name: str
    kind: str  # identity | inequality | equality-case
    lhs: float
    rhs: float
    residual: float  # residual or slack, depending on kind
    tolerance: float
    passed: bool
    notes: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "notes": self.notes,
        }


@dataclass
class RunReport:
    config: dict
    checks: list = field(default_factory=list)

    def add(self, check: CheckReport) -> None:
        self.checks.append(check)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "version": VERSION,
            "timestamp": run_timestamp(),
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for c in self.checks:
            notes_free = [
                c.name, c.kind, repr(float(c.lhs)), repr(float(c.rhs)),
                repr(float(c.residual)), repr(float(c.tolerance)),
                "true" if c.passed else "false",
            ]
            buf.write(",".join(notes_free) + "\n")
        return buf.getvalue()


def run_timestamp() -> str:
    """UTC RFC-3339 timestamp; SOURCE_DATE_EPOCH pins it for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.datetime.fromtimestamp(int(epoch), tz=datetime.timezone.utc)
    else:
        moment = datetime.datetime.now(tz=datetime.timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")
