"""Canonical JSON: sorted keys, 17-significant-digit floats, "inf" strings.

Result files must be byte-identical across reruns and worker counts, so
serialization is pinned down to the text of every float.  Infinities are
emitted as the strings "inf"/"-inf" (float() parses them back); NaN has
no sanctioned meaning in any result and is rejected.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["dumps", "dump", "write_jsonl", "loads", "load"]


def _float_text(x: float) -> str:
    if math.isnan(x):
        raise ValueError("NaN is not representable in result JSON")
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _emit(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        out.append(_float_text(float(value)))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _emit(value[key], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}: {value!r}")


def dumps(value) -> str:
    out: list[str] = []
    _emit(value, out)
    return "".join(out)


def dump(value, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps(value))
        fh.write("\n")


def write_jsonl(records, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for record in records:
            fh.write(dumps(record))
            fh.write("\n")


def loads(text: str):
    return json.loads(text)


def load(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)
