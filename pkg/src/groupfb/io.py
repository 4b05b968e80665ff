"""JSON / CSV reading and writing.

Complex numbers travel as ``[re, im]`` pairs.  Reports are written with
every float at 17 significant digits and a fixed key order so that equal
inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .groups import GroupSpec
from .polyphase import PolyphaseField
from .signals import GSignal


class InputError(ValueError):
    """Malformed input document; the message carries the location."""


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    text = resources.files("groupfb").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def parse_document(text: str, kind: str, source: str = "<input>") -> dict:
    """Decode ``text`` and validate it against the named schema."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    errors = sorted(
        jsonschema.Draft202012Validator(schema(kind)).iter_errors(doc),
        key=lambda e: list(map(str, e.absolute_path)),
    )
    if errors:
        e = errors[0]
        where = "/".join(map(str, e.absolute_path)) or "<root>"
        raise InputError(f"{source}: field {where}: {e.message}")
    return doc


def read_document(path, kind: str) -> tuple[dict, bytes]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None
    return parse_document(raw.decode("utf-8"), kind, str(path)), raw


def complex_array(pairs) -> np.ndarray:
    a = np.asarray(pairs, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def complex_pairs(values) -> list:
    a = np.asarray(values, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def signals_from_json(group: GroupSpec, bank: list, label: str) -> list[GSignal]:
    out = []
    for k, sig in enumerate(bank):
        if len(sig) != group.order:
            raise InputError(f"{label}[{k}]: expected {group.order} values (|N| * L), got {len(sig)}")
        out.append(GSignal.from_flat(group, complex_array(sig)))
    return out


def load_group(doc: dict, source: str = "<group>") -> GroupSpec:
    errors = list(jsonschema.Draft202012Validator(schema("group")).iter_errors(doc))
    if errors:
        e = errors[0]
        where = "/".join(map(str, e.absolute_path)) or "<root>"
        raise InputError(f"{source}: field {where}: {e.message}")
    return GroupSpec.from_dict(doc)


def digest(*chunks: bytes) -> str:
    h = hashlib.sha256()
    for c in chunks:
        h.update(len(c).to_bytes(8, "big"))
        h.update(c)
    return "sha256:" + h.hexdigest()


# -- deterministic JSON ----------------------------------------------------

def _scalar(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _normalise(obj: Any) -> Any:
    if isinstance(obj, GSignal):
        return complex_pairs(obj.flat)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return complex_pairs(obj)
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def _encode(obj: Any, indent: int, depth: int) -> str:
    obj = _normalise(obj)
    pad = " " * (indent * (depth + 1))
    end = " " * (indent * depth)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        parts = [_encode(v, indent, depth + 1) for v in obj]
        if all("\n" not in p for p in parts) and sum(map(len, parts)) < 2000:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    return _scalar(obj)


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON with 17 significant digits; complex values become ``[re, im]``."""
    return _encode(obj, indent, 0) + "\n"


# -- CSV --------------------------------------------------------------------

def polyphase_csv(field: PolyphaseField) -> str:
    """Stacked table of a polyphase field, one row per (character, entry)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    N = field.group.N
    w.writerow(["gamma_index", "gamma", "row", "col", "re", "im"])
    for g in range(N.order):
        label = " ".join(str(v) for v in N.element(g))
        m = field.matrices[g]
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                w.writerow([g, label, i, j, format(m[i, j].real, ".17g"), format(m[i, j].imag, ".17g")])
    return buf.getvalue()


def errors_csv(errors) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "relative_error"])
    for t, e in enumerate(errors):
        w.writerow([t, format(float(e), ".17g")])
    return buf.getvalue()
