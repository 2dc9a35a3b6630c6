"""JSON and CSV serialization for matrices, quaternions and reports."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

__all__ = ["matrix_to_json", "matrix_from_json", "dump_json", "to_jsonable", "write_text",
           "quaternions_to_json", "quaternions_from_json", "samples_to_csv", "histogram_to_csv",
           "OutputExistsError"]


class OutputExistsError(FileExistsError):
    pass


def _entry(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    f = float(v)
    if f.is_integer() and abs(f) < 2 ** 53:
        return int(f)
    return float(f"{f:.16e}")


def to_jsonable(obj):
    """Recursively convert numpy containers and scalars to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not np.isfinite(f):
            return None if np.isnan(f) else ("inf" if f > 0 else "-inf")
        return f
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def matrix_to_json(M, label: str | None = None) -> dict:
    """``{"dim", "rows", "label"}``; integral entries are written as ints."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    return {"dim": int(M.shape[0]), "rows": [[_entry(v) for v in row] for row in M], "label": label}


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, (str, os.PathLike)):
        obj = json.loads(Path(obj).read_text())
    rows = obj["rows"] if isinstance(obj, dict) else obj
    M = np.array(rows)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix JSON must have square 'rows'")
    if isinstance(obj, dict) and "dim" in obj and obj["dim"] != M.shape[0]:
        raise ValueError("matrix JSON 'dim' disagrees with 'rows'")
    if np.issubdtype(M.dtype, np.integer):
        return M.astype(np.int64)
    return M.astype(float)


def dump_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False) + "\n"


def write_text(path, text: str, force: bool = False) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise OutputExistsError(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def quaternions_to_json(q) -> list:
    q = np.asarray(q, dtype=float)
    return q.reshape(-1, 4).tolist() if q.ndim > 1 else q.tolist()


def quaternions_from_json(obj) -> np.ndarray:
    q = np.asarray(obj, dtype=float)
    if q.shape[-1] != 4:
        raise ValueError("quaternions are [w, x, y, z] arrays")
    return q


def samples_to_csv(samples_by_subsystem: dict) -> str:
    """Rows ``subsystem,q,p`` for each named ``(N, 2)`` sample array."""
    lines = ["subsystem,q,p"]
    for name, arr in samples_by_subsystem.items():
        for q, p in np.asarray(arr, dtype=float):
            lines.append(f"{name},{q:.17g},{p:.17g}")
    return "\n".join(lines) + "\n"


def histogram_to_csv(q_edges, p_edges, counts, subsystem: str = "") -> str:
    """One row per bin: ``subsystem,q_lo,q_hi,p_lo,p_hi,count``."""
    lines = ["subsystem,q_lo,q_hi,p_lo,p_hi,count"]
    for i in range(len(q_edges) - 1):
        for j in range(len(p_edges) - 1):
            lines.append(f"{subsystem},{q_edges[i]:.17g},{q_edges[i + 1]:.17g},"
                         f"{p_edges[j]:.17g},{p_edges[j + 1]:.17g},{int(counts[i, j])}")
    return "\n".join(lines) + "\n"
