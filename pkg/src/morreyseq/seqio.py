"""JSON sequence files.

``finite`` documents carry ``level`` and dense row-major ``values``;
``supported`` documents carry an ``entries`` list of ``{"k": [...], "v": ...}``
where ``v`` is a number or an ``[re, im]`` pair. Floats are written with
Python's shortest round-trip repr, so save-then-load is exact.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import jsonschema

from .embeddings import SignedSequence
from .spaces import AnySequence, FiniteSequence, SupportedSequence

_NUM = {"type": "number"}

SCHEMA = {
    "type": "object",
    "required": ["dim", "kind"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "kind": {"enum": ["finite", "supported"]},
        "level": {"type": "integer", "minimum": 0},
        "values": {"type": "array", "items": _NUM},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["k", "v"],
                "properties": {
                    "k": {"type": "array", "items": {"type": "integer"}},
                    "v": {"oneOf": [_NUM, {"type": "array", "items": _NUM,
                                            "minItems": 2, "maxItems": 2}]},
                },
                "additionalProperties": False,
            },
        },
    },
    "allOf": [
        {"if": {"required": ["kind"], "properties": {"kind": {"const": "finite"}}},
         "then": {"required": ["level", "values"]}},
        {"if": {"required": ["kind"], "properties": {"kind": {"const": "supported"}}},
         "then": {"required": ["entries"]}},
    ],
}


class SequenceFileError(ValueError):
    """Malformed or inconsistent sequence document."""


def _value(v) -> Union[float, complex]:
    if isinstance(v, list):
        return complex(v[0], v[1])
    return float(v)


def parse(doc) -> AnySequence:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SequenceFileError(f"schema violation at {where}: {exc.message}") from None
    dim = doc["dim"]
    try:
        if doc["kind"] == "finite":
            return FiniteSequence(dim, doc["level"], doc["values"])
        return SupportedSequence(dim, _entries(doc, dim))
    except ValueError as exc:
        raise SequenceFileError(str(exc)) from None


def _entries(doc, dim) -> dict:
    out = {}
    for e in doc["entries"]:
        k = tuple(e["k"])
        if len(k) != dim:
            raise SequenceFileError(f"entry {list(k)} does not have {dim} coordinates")
        if k in out:
            raise SequenceFileError(f"duplicate entry {list(k)}")
        out[k] = _value(e["v"])
    return out


def parse_signed(doc) -> SignedSequence:
    """Like :func:`parse` for supported real documents, keeping signs."""
    parse(doc)
    if doc["kind"] != "supported":
        raise SequenceFileError("signed sequences must be of kind 'supported'")
    if any(isinstance(e["v"], list) for e in doc["entries"]):
        raise SequenceFileError("signed sequences must be real")
    return SignedSequence(doc["dim"], {k: v for k, v in _entries(doc, doc["dim"]).items() if v != 0})


def _check_finite(x: float) -> float:
    if not math.isfinite(x):
        raise SequenceFileError("values must be finite")
    return float(x)


def to_doc(seq: Union[AnySequence, SignedSequence]) -> dict:
    if isinstance(seq, FiniteSequence):
        return {"dim": seq.dim, "kind": "finite", "level": seq.level,
                "values": [_check_finite(v) for v in seq.values]}
    return {"dim": seq.dim, "kind": "supported",
            "entries": [{"k": list(k), "v": _check_finite(v)} for k, v in seq.entries.items()]}


def dumps(seq) -> str:
    return json.dumps(to_doc(seq), indent=1) + "\n"


def save(seq, path) -> None:
    Path(path).write_text(dumps(seq), encoding="utf-8", newline="\n")


def _read(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SequenceFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SequenceFileError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load(path) -> AnySequence:
    return parse(_read(path))


def load_signed(path) -> SignedSequence:
    return parse_signed(_read(path))
