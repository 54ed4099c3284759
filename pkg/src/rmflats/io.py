"""Text formats for truth tables, flat sets and base codes, plus JSON helpers.

All formats open with the field context: ``p r`` (plus dimensions) on the
first line and, when r > 1, the r+1 modulus coefficients low-to-high on the
second.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .flats import FlatSet, canonicalize
from .gf import FieldSpec
from .poly import ReducedPoly, TruthTable, point_index, point_tuple


class FormatError(ValueError):
    pass


def _tokens(text: str) -> list[list[str]]:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line.split())
    return lines


def _read_field(lines, header_len: int):
    if not lines or len(lines[0]) != header_len:
        raise FormatError(f"header must have {header_len} integers")
    try:
        head = [int(a) for a in lines[0]]
    except ValueError as err:
        raise FormatError(f"bad header: {err}") from None
    p, r = head[0], head[1]
    rest = lines[1:]
    modulus = ()
    if r > 1:
        if not rest:
            raise FormatError("missing modulus line")
        modulus = tuple(int(a) for a in rest[0])
        rest = rest[1:]
    try:
        field = FieldSpec(p, r, modulus)
    except ValueError as err:
        raise FormatError(str(err)) from None
    return field, head[2:], rest


def _field_lines(field: FieldSpec, *dims: int) -> list[str]:
    out = [" ".join(map(str, (field.p, field.r) + dims))]
    if field.r > 1:
        out.append(" ".join(map(str, field.modulus)))
    return out


# --- truth tables ---------------------------------------------------------------------------

def dumps_truth_table(f: TruthTable, per_line: int = 32) -> str:
    out = _field_lines(f.field, f.n)
    vals = [str(int(v)) for v in f.values]
    out += [" ".join(vals[i:i + per_line]) for i in range(0, len(vals), per_line)]
    return "\n".join(out) + "\n"


def loads_truth_table(text: str) -> TruthTable:
    field, (n,), rest = _read_field(_tokens(text), 3)
    vals = [int(a) for line in rest for a in line]
    if len(vals) != field.q ** n:
        raise FormatError(f"expected {field.q ** n} values, found {len(vals)}")
    try:
        return TruthTable(field, n, np.array(vals, dtype=np.int64))
    except ValueError as err:
        raise FormatError(str(err)) from None


def write_truth_table(path, f: TruthTable) -> None:
    Path(path).write_text(dumps_truth_table(f))


def read_truth_table(path) -> TruthTable:
    return loads_truth_table(Path(path).read_text())


# --- flat sets ------------------------------------------------------------------------------

def dumps_flat_set(S: FlatSet) -> str:
    q = S.field.q
    out = _field_lines(S.field, S.n, S.t)
    for A in sorted(S.members, key=lambda A: (A.basis, A.base)):
        dirs = " ; ".join(str(point_index(b, q)) for b in A.basis)
        out.append(f"{point_index(A.base, q)} | {dirs}".rstrip())
    return "\n".join(out) + "\n"


def loads_flat_set(text: str) -> FlatSet:
    raw = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    raw = [ln for ln in raw if ln]
    head_lines = 2 if len(raw) > 0 and len(raw[0].split()) == 4 and int(raw[0].split()[1]) > 1 else 1
    field, (n, t), _ = _read_field([ln.split() for ln in raw[:head_lines]], 4)
    q = field.q
    members = []
    for line in raw[head_lines:]:
        if "|" not in line:
            raise FormatError(f"flat line without '|': {line!r}")
        base_s, dirs_s = line.split("|", 1)
        try:
            base = point_tuple(int(base_s), q, n)
            dirs = [point_tuple(int(d), q, n) for d in dirs_s.split(";") if d.strip()]
        except ValueError as err:
            raise FormatError(str(err)) from None
        if len(dirs) != t:
            raise FormatError(f"expected {t} direction vectors, found {len(dirs)}")
        try:
            members.append(canonicalize(field, base, dirs))
        except ValueError as err:
            raise FormatError(str(err)) from None
    return FlatSet.of(field, n, t, members)


def write_flat_set(path, S: FlatSet) -> None:
    Path(path).write_text(dumps_flat_set(S))


def read_flat_set(path) -> FlatSet:
    return loads_flat_set(Path(path).read_text())


# --- base codes -----------------------------------------------------------------------------

def dumps_base_code(B) -> str:
    out = _field_lines(B.field, B.t)
    out += [" ".join(map(str, M)) for M in sorted(B.support)]
    return "\n".join(out) + "\n"


def loads_base_code(text: str):
    from .lifted import BaseCode
    field, (t,), rest = _read_field(_tokens(text), 3)
    monos = []
    for line in rest:
        if len(line) != t:
            raise FormatError(f"monomial line must have {t} exponents: {line}")
        monos.append(tuple(int(a) for a in line))
    return BaseCode(field, t, frozenset(monos))


def write_base_code(path, B) -> None:
    Path(path).write_text(dumps_base_code(B))


def read_base_code(path):
    return loads_base_code(Path(path).read_text())


# --- JSON ------------------------------------------------------------------------------------

def encode(obj):
    """JSON-ready form; rationals become {"exact": "num/den", "value": float}."""
    if isinstance(obj, Fraction):
        return {"exact": f"{obj.numerator}/{obj.denominator}", "value": float(obj)}
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, ReducedPoly):
        return {"n": obj.n, "terms": [[list(e), c] for e, c in sorted(obj.terms.items())]}
    return obj


def decode_fraction(v) -> Fraction:
    if isinstance(v, dict) and "exact" in v:
        return Fraction(v["exact"])
    return Fraction(v)


def dump_json(path, obj) -> None:
    text = json.dumps(encode(obj), indent=2, sort_keys=False)
    if path is None or str(path) == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")
