"""Matrix text files and JSON run reports.

Matrix file: first line ``rows cols``, then ``rows`` lines of ``cols``
space-separated decimals written with 17 significant digits, which round
trips every float64 exactly.

Reports are one JSON document with ``schema_version`` ``"1"``. Matrices up
to 64x64 are embedded as ``{"rows", "cols", "data"}`` with ``data`` flat and
row-major; larger ones are written next to the report and referenced as
``{"rows", "cols", "path"}`` relative to it.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional

import numpy as np

from . import __version__

__all__ = [
    "SCHEMA_VERSION",
    "EMBED_LIMIT",
    "write_matrix",
    "read_matrix",
    "matrix_to_json",
    "matrix_from_json",
    "to_jsonable",
    "RunReport",
]

SCHEMA_VERSION = "1"
EMBED_LIMIT = 64


def write_matrix(path, M) -> None:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("only 2-D matrices can be written")
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    lines += [" ".join(f"{v:.16e}" for v in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = [float(t) for t in tokens[2:]]
    except ValueError as exc:
        raise ValueError(f"{path}: malformed matrix file ({exc})") from None
    if rows < 1 or cols < 1 or len(values) != rows * cols:
        raise ValueError(f"{path}: header says {rows}x{cols} but found {len(values)} entries")
    M = np.array(values, dtype=np.float64).reshape(rows, cols)
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{path}: non-finite entries")
    return M


def matrix_to_json(M, sink: Optional[List] = None) -> dict:
    """JSON form of ``M``; oversized matrices are appended to ``sink`` and referenced by name."""
    M = np.asarray(M, dtype=np.float64)
    rows, cols = M.shape
    if rows <= EMBED_LIMIT and cols <= EMBED_LIMIT:
        return {"rows": rows, "cols": cols, "data": [float(v) for v in M.ravel()]}
    if sink is None:
        raise ValueError("matrices larger than 64x64 need a sink for sibling files")
    name = f"matrix_{len(sink):03d}.txt"
    sink.append((name, M))
    return {"rows": rows, "cols": cols, "path": name}


def matrix_from_json(obj: dict, base_dir=".") -> np.ndarray:
    if "data" in obj:
        return np.array(obj["data"], dtype=np.float64).reshape(obj["rows"], obj["cols"])
    return read_matrix(Path(base_dir) / obj["path"])


def to_jsonable(obj: Any, sink: Optional[List] = None) -> Any:
    """Recursively convert reports, arrays and numpy scalars to JSON types."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict(), sink)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, sink) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, sink) for v in obj]
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return matrix_to_json(obj, sink)
        return [to_jsonable(v, sink) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


@dataclass
class RunReport:
    command: str
    tolerance_profile: dict
    problem_spec: Optional[dict] = None
    inputs: dict = field(default_factory=dict)
    certificates: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    solver_diagnostics: Optional[Any] = None
    details: dict = field(default_factory=dict)
    wall_time_ms: float = 0.0
    tool_version: str = __version__

    def to_dict(self, sink: Optional[List] = None) -> dict:
        return to_jsonable({
            "schema_version": SCHEMA_VERSION,
            "tool_version": self.tool_version,
            "command": self.command,
            "problem_spec": self.problem_spec,
            "tolerance_profile": self.tolerance_profile,
            "inputs": self.inputs,
            "certificates": self.certificates,
            "counterexamples": self.counterexamples,
            "solver_diagnostics": self.solver_diagnostics,
            "details": self.details,
            "wall_time_ms": float(self.wall_time_ms),
        }, sink)

    def write(self, path) -> dict:
        """Serialize to ``path``; oversized matrices go to sibling files."""
        path = Path(path)
        sink: List = []
        doc = self.to_dict(sink)
        if sink:
            mapping = {name: f"{path.stem}.{name}" for name, _ in sink}
            for name, M in sink:
                write_matrix(path.parent / mapping[name], M)
            _rename_paths(doc, mapping)
        text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text + "\n")
        os.replace(tmp, path)
        return doc


def _rename_paths(obj, mapping: dict) -> None:
    if isinstance(obj, dict):
        if "rows" in obj and obj.get("path") in mapping:
            obj["path"] = mapping[obj["path"]]
        for v in obj.values():
            _rename_paths(v, mapping)
    elif isinstance(obj, list):
        for v in obj:
            _rename_paths(v, mapping)
