"""Audit-report containers and deterministic CSV/JSON writers.

Every artifact written here must be byte-identical across repeated runs with
the same inputs: floats are rendered with ``repr`` (shortest round-trip form),
entries are sorted, and no timestamps or absolute paths appear in the output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PASS = "pass"
FAIL = "fail"
FLAGGED = "flagged"
REFUSED = "refused"

_SEVERITY = {PASS: 0, FAIL: 1, FLAGGED: 1, REFUSED: 2}

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_REFUSED = 2
EXIT_CONFIG = 3


@dataclass
class AuditEntry:
    """Outcome of one check.

    ``margin`` is signed slack: non-negative for passing entries, negative for
    violations.  ``witness`` names the sample point (and any auxiliary data)
    where the extreme value was attained; failing entries always carry one.
    """

    check_id: str
    status: str
    margin: float = 0.0
    witness: dict | None = None
    values: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def severity(self) -> int:
        return _SEVERITY[self.status]


@dataclass
class AuditReport:
    entries: list[AuditEntry] = field(default_factory=list)
    sample_count: int = 0
    label: str = "sampled"

    def add(self, fragment) -> None:
        """Append a single entry or an iterable of entries."""
        if isinstance(fragment, AuditEntry):
            self.entries.append(fragment)
        else:
            self.entries.extend(fragment)

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, FLAGGED: 0, REFUSED: 0}
        for e in self.entries:
            out[e.status] += 1
        return out

    def exit_code(self) -> int:
        if not self.entries:
            return EXIT_OK
        return max(e.severity for e in self.entries)

    def find(self, check_id: str) -> AuditEntry:
        for e in self.entries:
            if e.check_id == check_id:
                return e
        raise KeyError(check_id)

    def to_dict(self) -> dict:
        def key(e: AuditEntry):
            return (e.check_id, json.dumps(plain(e.witness), sort_keys=True))

        entries = [
            {
                "check_id": e.check_id,
                "status": e.status,
                "margin": plain(e.margin),
                "witness": plain(e.witness),
                "values": plain(e.values),
                "notes": e.notes,
            }
            for e in sorted(self.entries, key=key)
        ]
        summary = self.counts()
        summary["exit_code"] = self.exit_code()
        return {
            "version": 1,
            "label": self.label,
            "sample_count": self.sample_count,
            "summary": summary,
            "entries": entries,
        }

    def write(self, path) -> None:
        write_json(path, self.to_dict())


def plain(obj):
    """Convert to JSON-safe plain data; non-finite floats become strings."""
    if obj is None or isinstance(obj, (str, bool, int)):
        return obj
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [plain(x) for x in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [plain(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    return str(obj)


def fmt(value) -> str:
    """Render one CSV cell; floats use shortest round-trip representation."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def fmt_vector(v) -> str:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.size == 1:
        return fmt(float(arr[0]))
    return ";".join(fmt(float(c)) for c in arr)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path, obj) -> None:
    Path(path).write_text(
        json.dumps(plain(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
