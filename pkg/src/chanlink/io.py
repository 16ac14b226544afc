"""JSON documents for channels and isometries, CSV for sweeps.

Complex entries are stored as ``[re, im]`` pairs in row-major order. Floats go
through ``repr`` (shortest round-trip form, at most 17 significant digits), so
store followed by load is bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from chanlink.channel import Channel
from chanlink.dilation import Isometry
from chanlink.errors import ShapeError
from chanlink.fidelity import SweepResult
from chanlink.tensor import Leg

SCHEMA_VERSION = 1


def format_value(x: float) -> str:
    """12 significant digits, always with a decimal point (``1`` prints as ``1.0``)."""
    s = f"{x:.12g}"
    if not any(ch in s for ch in ".eninf"):
        s += ".0"
    return s


def _legs_doc(legs) -> list[dict]:
    return [{"label": str(leg.label), "dim": leg.dim} for leg in legs]


def _legs_from(doc: list[dict]) -> tuple[Leg, ...]:
    return tuple(Leg(str(item["label"]), int(item["dim"])) for item in doc)


def _matrix_doc(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _matrix_from(doc) -> np.ndarray:
    arr = np.asarray(doc, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ShapeError(f"matrix must be a nested array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _dump(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":")) + "\n"


def _check_header(doc: dict, kind: str) -> None:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ShapeError(f"unsupported schema_version {doc.get('schema_version')!r}")
    if doc.get("kind", kind) != kind:
        raise ShapeError(f"expected a {kind} document, got {doc.get('kind')!r}")


def channel_to_document(c: Channel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "channel",
        "legs_in": _legs_doc(c.in_legs),
        "legs_out": _legs_doc(c.out_legs),
        "choi": _matrix_doc(c.choi.data),
    }


def channel_from_document(doc: dict) -> Channel:
    _check_header(doc, "channel")
    return Channel(_legs_from(doc["legs_in"]), _legs_from(doc["legs_out"]), _matrix_from(doc["choi"]))


def dumps_channel(c: Channel) -> str:
    return _dump(channel_to_document(c))


def store_channel(c: Channel, path) -> None:
    Path(path).write_text(dumps_channel(c), encoding="utf-8")


def load_channel(path) -> Channel:
    return channel_from_document(json.loads(Path(path).read_text(encoding="utf-8")))


def isometry_to_document(v: Isometry) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "isometry",
        "legs_in": _legs_doc(v.in_legs),
        "legs_out": _legs_doc(v.out_legs),
        "legs_anc": _legs_doc(v.anc_legs),
        "v": _matrix_doc(v.v),
    }


def isometry_from_document(doc: dict) -> Isometry:
    _check_header(doc, "isometry")
    return Isometry(
        _legs_from(doc["legs_in"]),
        _legs_from(doc["legs_out"]),
        _legs_from(doc["legs_anc"]),
        _matrix_from(doc["v"]),
    )


def dumps_isometry(v: Isometry) -> str:
    return _dump(isometry_to_document(v))


def store_isometry(v: Isometry, path) -> None:
    Path(path).write_text(dumps_isometry(v), encoding="utf-8")


def load_isometry(path) -> Isometry:
    return isometry_from_document(json.loads(Path(path).read_text(encoding="utf-8")))


def sweep_to_csv(result: SweepResult) -> str:
    lines = ["n,fidelity"]
    lines += [f"{n},{format_value(v)}" for n, v in result.rows]
    lines += [
        f"# fid1={format_value(result.fid1)}",
        f"# epsilon={format_value(result.epsilon)}",
        f"# n_tilde={result.n_tilde}",
        f"# checked_n={','.join(str(n) for n, _ in result.checks)}",
        f"# max_discrepancy={result.max_discrepancy:.3e}",
    ]
    return "\n".join(lines) + "\n"


def read_sweep_csv(text: str) -> dict:
    """Parse a sweep CSV back into ``{"rows": [(n, value)], <footer key>: str}``."""
    out: dict = {"rows": []}
    for line in text.splitlines():
        if not line or line == "n,fidelity":
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            out[key] = value
            continue
        n, value = line.split(",")
        out["rows"].append((int(n), float(value)))
    return out
