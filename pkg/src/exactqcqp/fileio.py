"""JSON instance files.

Matrices are stored as their lower triangle, row by row:
``[a11, a21, a22, a31, a32, a33, ...]``. Python's ``json`` writes floats
with the shortest repr that round-trips, so ``loads(dumps(f)) == f``
bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constraints import Constraint, ConstraintSet
from .instances import QcqpInstance, last_coordinate_h

SCHEMA_VERSION = 1
SCHEMA_DIR = Path(__file__).parent / "schemas"


class InstanceFormatError(ValueError):
    """The document is not a valid instance file."""


def to_lower(a) -> list[float]:
    a = np.asarray(a, dtype=float)
    return [float(a[i, j]) for i in range(a.shape[0]) for j in range(i + 1)]


def from_lower(values, n: int | None = None) -> np.ndarray:
    vals = [float(v) for v in values]
    if n is None:
        n = int(round((math.sqrt(8 * len(vals) + 1) - 1) / 2))
    if len(vals) != n * (n + 1) // 2:
        raise InstanceFormatError(f"lower triangle of a {n}x{n} matrix needs {n * (n + 1) // 2} entries, got {len(vals)}")
    out = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i + 1):
            out[i, j] = out[j, i] = vals[k]
            k += 1
    return out


@dataclass
class InstanceFile:
    n: int
    H: np.ndarray
    constraints: ConstraintSet
    Q: np.ndarray | None = None
    objectives: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __eq__(self, other):
        if not isinstance(other, InstanceFile):
            return NotImplemented
        same_q = (self.Q is None and other.Q is None) or (
            self.Q is not None and other.Q is not None and np.array_equal(self.Q, other.Q)
        )
        return (
            self.n == other.n
            and self.schema_version == other.schema_version
            and np.array_equal(self.H, other.H)
            and same_q
            and self.constraints == other.constraints
            and self.objectives.keys() == other.objectives.keys()
            and all(np.array_equal(v, other.objectives[k]) for k, v in self.objectives.items())
            and self.metadata == other.metadata
        )

    @classmethod
    def from_set(cls, cset: ConstraintSet, Q=None, H=None, objectives=None, metadata=None) -> "InstanceFile":
        n = cset.n
        if n is None:
            if Q is None:
                raise ValueError("an empty constraint set needs Q to fix the dimension")
            n = np.asarray(Q).shape[0]
        meta = dict(cset.metadata) if metadata is None else dict(metadata)
        return cls(
            n=n,
            H=last_coordinate_h(n) if H is None else np.asarray(H, dtype=float),
            constraints=cset,
            Q=None if Q is None else np.asarray(Q, dtype=float),
            objectives={k: np.asarray(v, dtype=float) for k, v in (objectives or {}).items()},
            metadata=_plain(meta),
        )

    def instance(self, objective: str | None = None, Q=None) -> QcqpInstance:
        """Build a solvable instance; ``Q`` wins over ``objective`` over the file's own ``Q``."""
        if Q is None and objective is not None:
            if objective not in self.objectives:
                raise KeyError(f"no objective named {objective!r} (have {sorted(self.objectives)})")
            Q = self.objectives[objective]
        if Q is None:
            Q = self.Q
        if Q is None:
            raise ValueError("instance file has no objective; pass one explicitly")
        return QcqpInstance(np.asarray(Q, dtype=float), self.H, self.constraints, dict(self.metadata))


def _plain(obj):
    """Convert numpy scalars/arrays inside metadata to JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def to_dict(doc: InstanceFile) -> dict:
    out = {
        "schema_version": doc.schema_version,
        "n": doc.n,
        "H": to_lower(doc.H),
        "constraints": [{"label": c.label, "matrix": to_lower(c.matrix)} for c in doc.constraints],
        "alphas": None if doc.constraints.alphas is None else list(doc.constraints.alphas),
        "metadata": _plain(doc.metadata),
    }
    if doc.Q is not None:
        out["Q"] = to_lower(doc.Q)
    if doc.objectives:
        out["objectives"] = {k: to_lower(v) for k, v in doc.objectives.items()}
    return out


def _require(d: dict, key: str, kind):
    if key not in d:
        raise InstanceFormatError(f"missing field {key!r}")
    if not isinstance(d[key], kind):
        raise InstanceFormatError(f"field {key!r} has the wrong type")
    return d[key]


def from_dict(d: dict) -> InstanceFile:
    if not isinstance(d, dict):
        raise InstanceFormatError("instance file must be a JSON object")
    version = _require(d, "schema_version", int)
    if version != SCHEMA_VERSION:
        raise InstanceFormatError(f"unsupported schema_version {version}")
    n = _require(d, "n", int)
    if n < 1:
        raise InstanceFormatError("n must be positive")
    try:
        H = from_lower(_require(d, "H", list), n)
        cons = []
        for item in _require(d, "constraints", list):
            if not isinstance(item, dict) or "matrix" not in item:
                raise InstanceFormatError("each constraint needs a 'matrix'")
            cons.append(Constraint(from_lower(item["matrix"], n), str(item.get("label", ""))))
        alphas = d.get("alphas")
        cset = ConstraintSet(tuple(cons), None if alphas is None else tuple(alphas), dict(d.get("metadata") or {}))
        Q = from_lower(d["Q"], n) if d.get("Q") is not None else None
        objectives = {str(k): from_lower(v, n) for k, v in (d.get("objectives") or {}).items()}
    except InstanceFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(str(exc)) from exc
    return InstanceFile(n, H, cset, Q, objectives, dict(d.get("metadata") or {}), version)


def dumps(doc: InstanceFile) -> str:
    return json.dumps(to_dict(doc), indent=2, allow_nan=False) + "\n"


def loads(text: str) -> InstanceFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    return from_dict(data)


def save(doc: InstanceFile, path) -> None:
    Path(path).write_text(dumps(doc))


def load(path) -> InstanceFile:
    return loads(Path(path).read_text())


def load_schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / name).read_text())
