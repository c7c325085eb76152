"""Deterministic JSON, CSV and binary snapshot output tagged with a config digest."""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"MWSNAP01"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def config_digest(config: dict) -> str:
    """SHA-256 of the canonical JSON form of a config dictionary."""
    text = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def write_json(path: str | Path, payload: dict, digest: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"config_digest": digest, **_plain(payload)}
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")
    return path


def write_csv(path: str | Path, header: list, rows, digest: str) -> Path:
    """CSV with a leading ``# config_digest`` comment line; floats in repr form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# config_digest: {digest}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.asarray(rows):
            w.writerow([repr(float(v)) for v in row])
    return path


def read_csv(path: str | Path) -> tuple:
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, np.array([[float(v) for v in row] for row in reader])


def write_snapshots(path: str | Path, grid, times, fields, digest: str) -> Path:
    """Binary snapshots: magic, header length, JSON header, complex128 data (T x N)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = np.ascontiguousarray(fields, dtype=np.complex128)
    header = json.dumps(
        {"config_digest": digest, "grid": grid.to_dict(), "t": _plain(np.asarray(times)), "shape": list(fields.shape)},
        sort_keys=True,
    ).encode()
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        fh.write(fields.tobytes())
    return path


def read_snapshots(path: str | Path) -> tuple:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValueError("not a snapshot file")
    (hlen,) = struct.unpack("<Q", data[8:16])
    header = json.loads(data[16 : 16 + hlen])
    arr = np.frombuffer(data[16 + hlen :], dtype=np.complex128).reshape(header["shape"])
    return header, arr
