"""Deterministic output artifacts: cutline CSV, field dumps, reports.

The field dump is a raw little-endian float32 payload plus a plain-text
sidecar header carrying everything needed to load the file elsewhere
(dims, spacing, quantity, units, ordering, sha256 of the payload).
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .fields import ScalarField


class OutputError(ValueError):
    pass


def _sanitize(label: str) -> str:
    """Unit/quantity text as a CSV column token."""
    out = label.replace("/", "_per_").replace("^", "").replace(" ", "")
    return "".join(c for c in out if c.isalnum() or c == "_")


def write_cutline_csv(profile, path: str | Path) -> Path:
    """CSV with header ``position_cm,<quantity>_<units>`` and one row per
    sample at full float precision (repr round-trips), so identical inputs
    produce byte-identical files."""
    path = Path(path)
    if len(profile.positions_cm) == 0:
        raise OutputError("empty profile")
    col = f"{_sanitize(profile.quantity)}_{_sanitize(profile.units)}"
    lines = [f"position_cm,{col}"]
    for p, v in zip(profile.positions_cm, profile.values):
        lines.append(f"{float(p)!r},{float(v)!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_probe_csv(times, traces: dict, path: str | Path) -> Path:
    """Transient probe traces: ``time_s,T_<name>_C,...`` rows."""
    path = Path(path)
    names = list(traces)
    header = "time_s," + ",".join(f"T_{name}_C" for name in names)
    lines = [header]
    for i, t in enumerate(times):
        row = [f"{float(t)!r}"] + [f"{float(traces[name][i])!r}" for name in names]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_field_dump(field: ScalarField, path: str | Path) -> tuple[Path, Path]:
    """Write ``path`` (raw float32) and ``path + .hdr`` (text header).

    Payload ordering is x-fastest row-major: index = x + nx*(y + ny*z).
    """
    path = Path(path)
    if not np.all(np.isfinite(field.values)):
        raise OutputError("field contains non-finite values")
    payload = np.asfortranarray(field.values, dtype="<f4").tobytes(order="F")
    checksum = hashlib.sha256(payload).hexdigest()
    nx, ny, nz = field.values.shape
    header = "\n".join([
        f"dims: {nx} {ny} {nz}",
        f"spacing_mm: {field.spacing * 10.0!r}",
        f"quantity: {field.quantity}",
        f"units: {field.units}",
        "encoding: float32 little-endian",
        "ordering: x-fastest row-major",
        f"checksum: sha256:{checksum}",
    ]) + "\n"
    path.write_bytes(payload)
    hdr = path.with_name(path.name + ".hdr")
    hdr.write_text(header)
    return path, hdr


def read_field_dump(path: str | Path) -> ScalarField:
    """Load a field dump; verifies length and checksum, bit-exact values."""
    path = Path(path)
    hdr_path = path.with_name(path.name + ".hdr")
    if not hdr_path.exists():
        raise OutputError(f"missing header file {hdr_path}")
    meta = {}
    for line in hdr_path.read_text().splitlines():
        if ":" in line:
            key, _, val = line.partition(":")
            meta[key.strip()] = val.strip()
    try:
        dims = tuple(int(d) for d in meta["dims"].split())
        spacing_mm = float(meta["spacing_mm"])
    except (KeyError, ValueError) as e:
        raise OutputError(f"{hdr_path}: bad header: {e}") from None
    payload = path.read_bytes()
    expected = 4 * dims[0] * dims[1] * dims[2]
    if len(payload) != expected:
        raise OutputError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    checksum = hashlib.sha256(payload).hexdigest()
    stated = meta.get("checksum", "")
    if stated != f"sha256:{checksum}":
        raise OutputError(f"{path}: checksum mismatch")
    values = np.frombuffer(payload, dtype="<f4").reshape(dims, order="F")
    return ScalarField(
        np.ascontiguousarray(values), spacing_mm / 10.0,
        quantity=meta.get("quantity", ""), units=meta.get("units", ""),
    )
