"""File formats: JSON complexes and towers, CSV/JSON report writers.

Complex file::

    {"format": 1,
     "group": {"kind": "free", "rank": 2},
     "coefficients": "Z",
     "ranks": [1, 2],
     "boundaries": {"1": [[[{"word": "g0", "coeff": "1"}, {"word": "", "coeff": "-1"}]],
                          [[{"word": "g1", "coeff": "1"}, {"word": "", "coeff": "-1"}]]]}}

``boundaries[q][i][j]`` is the list of terms of entry ``(i, j)`` of ``A_q``.
Words are space separated tokens ``gK`` or ``gK^N`` (``N`` a nonzero
integer, usually ``-1``); the empty word is the identity.  Coefficients are
decimal strings (``"num/den"`` allowed over Q).

Tower file::

    {"format": 1,
     "levels": [{"order": 4, "generators": [[1, 0, 3, 2], [2, 3, 0, 1]], "label": "..."}],
     "maps": [[0, 0, 1, 1]]}

``maps`` is optional; ``maps[i]`` sends the points of level ``i + 2`` to those
of level ``i + 1``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import tempfile
import warnings
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .complexes import ChainComplexSpec
from .groupring import GroupRingElement, GroupRingMatrix, ring_from_label
from .groups import FiniteQuotient, GroupElement, GroupModelSpec, Tower, validate_tower

FORMAT_VERSION = 1

_COMPLEX_KEYS = {"format", "group", "coefficients", "ranks", "boundaries", "name", "params"}
_GROUP_KEYS = {"kind", "rank"}
_TERM_KEYS = {"word", "coeff"}
_TOWER_KEYS = {"format", "levels", "maps", "p_step_refinement", "meta"}
_LEVEL_KEYS = {"order", "generators", "label"}

_TOKEN = re.compile(r"g(\d+)(?:\^(-?\d+))?$")


class FormatError(ValueError):
    pass


def _unknown(obj: dict, allowed: set, where: str, strict: bool):
    extra = sorted(set(obj) - allowed)
    if not extra:
        return
    msg = f"{where}: unknown field(s) {', '.join(extra)}"
    if strict:
        raise FormatError(msg)
    warnings.warn(msg, stacklevel=3)


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    if doc.get("format", FORMAT_VERSION) != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {doc.get('format')!r}")
    return doc


def parse_word(model: GroupModelSpec, text: str) -> GroupElement:
    word = []
    for tok in text.split():
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad word token {tok!r}")
        j, e = int(m.group(1)), int(m.group(2) or 1)
        if e == 0:
            raise ValueError(f"zero exponent in {tok!r}")
        if j >= model.ngens:
            raise ValueError(f"generator g{j} out of range for {model}")
        word.append((j, e))
    return model.from_word(word)


def format_word(g: GroupElement) -> str:
    tokens = []
    for j, e in g.word():
        tokens.extend([f"g{j}"] * e if e > 0 else [f"g{j}^{e}"])
    return " ".join(tokens)


def complex_from_dict(doc: dict, strict: bool = True, where: str = "complex") -> ChainComplexSpec:
    _unknown(doc, _COMPLEX_KEYS, where, strict)
    for key in ("group", "coefficients", "ranks", "boundaries"):
        if key not in doc:
            raise FormatError(f"{where}: missing field {key!r}")
    group = doc["group"]
    if not isinstance(group, dict):
        raise FormatError(f"{where}: group: expected an object")
    _unknown(group, _GROUP_KEYS, f"{where}: group", strict)
    try:
        model = GroupModelSpec(group["kind"], int(group.get("rank", 1)))
        ring = ring_from_label(doc["coefficients"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}") from exc
    ranks = doc["ranks"]
    if not isinstance(ranks, list) or not all(isinstance(n, int) and n >= 0 for n in ranks) or not ranks:
        raise FormatError(f"{where}: ranks: expected a nonempty list of nonnegative integers")
    if not isinstance(doc["boundaries"], dict):
        raise FormatError(f"{where}: boundaries: expected an object keyed by degree")

    boundaries = {}
    for key, rows in doc["boundaries"].items():
        path = f"{where}: boundaries[{key}]"
        try:
            q = int(key)
        except ValueError:
            raise FormatError(f"{path}: degree must be an integer") from None
        if not 1 <= q < len(ranks):
            raise FormatError(f"{path}: degree outside 1..{len(ranks) - 1}")
        shape = (ranks[q], ranks[q - 1])
        if not isinstance(rows, list) or len(rows) != shape[0] or any(
            not isinstance(r, list) or len(r) != shape[1] for r in rows
        ):
            raise FormatError(f"{path}: expected a {shape[0]} x {shape[1]} matrix")
        entries = []
        for i, row in enumerate(rows):
            out_row = []
            for j, terms in enumerate(row):
                out_row.append(_parse_entry(model, ring, terms, f"{path}[{i}][{j}]", strict))
            entries.append(out_row)
        boundaries[q] = GroupRingMatrix(model, ring, entries, shape[0], shape[1])
    try:
        return ChainComplexSpec(
            model, ring, tuple(ranks), boundaries, doc.get("name", ""), dict(doc.get("params", {}))
        )
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from exc


def _parse_entry(model, ring, terms, path, strict) -> GroupRingElement:
    if not isinstance(terms, list):
        raise FormatError(f"{path}: expected a list of terms")
    out = []
    for k, term in enumerate(terms):
        tpath = f"{path}[{k}]"
        if not isinstance(term, dict) or "word" not in term or "coeff" not in term:
            raise FormatError(f"{tpath}: expected {{'word': ..., 'coeff': ...}}")
        _unknown(term, _TERM_KEYS, tpath, strict)
        if not isinstance(term["word"], str) or not isinstance(term["coeff"], str):
            raise FormatError(f"{tpath}: word and coeff must be strings")
        try:
            g = parse_word(model, term["word"])
            c = ring.coerce(Fraction(term["coeff"]))
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"{tpath}: {exc}") from exc
        out.append((g, c))
    return GroupRingElement(model, ring, out)


def complex_to_dict(C: ChainComplexSpec) -> dict:
    boundaries = {}
    for q in sorted(C.boundaries):
        A = C.boundaries[q]
        rows = []
        for row in A.entries:
            rows.append(
                [
                    [
                        {"word": format_word(g), "coeff": str(c)}
                        for g, c in sorted(a.terms.items(), key=lambda gc: format_word(gc[0]))
                    ]
                    for a in row
                ]
            )
        boundaries[str(q)] = rows
    doc = {
        "format": FORMAT_VERSION,
        "group": {"kind": C.model.kind, "rank": C.model.rank},
        "coefficients": C.coefficients.label,
        "ranks": list(C.ranks),
        "boundaries": boundaries,
    }
    if C.name:
        doc["name"] = C.name
    if C.params:
        doc["params"] = dict(C.params)
    return doc


def data_file(name: str) -> Path:
    """Path of a fixture shipped with the package (``torus2.json``, ...)."""
    return Path(str(resources.files("towerlab") / "data" / name))


def load_complex(path, strict: bool = True) -> ChainComplexSpec:
    return complex_from_dict(_read_json(path), strict, str(path))


def dump_complex(C: ChainComplexSpec, path) -> None:
    write_json(path, complex_to_dict(C))


def tower_from_dict(doc: dict, strict: bool = True, where: str = "tower") -> Tower:
    _unknown(doc, _TOWER_KEYS, where, strict)
    levels = doc.get("levels")
    if not isinstance(levels, list) or not levels:
        raise FormatError(f"{where}: 'levels' must be a nonempty list")
    qs = []
    for i, lv in enumerate(levels, start=1):
        path = f"{where}: level {i}"
        if not isinstance(lv, dict) or "order" not in lv or "generators" not in lv:
            raise FormatError(f"{path}: expected 'order' and 'generators'")
        _unknown(lv, _LEVEL_KEYS, path, strict)
        gens = lv["generators"]
        if not isinstance(lv["order"], int) or not isinstance(gens, list) or not all(
            isinstance(s, list) and all(isinstance(x, int) for x in s) for s in gens
        ):
            raise FormatError(f"{path}: order must be an integer and generators lists of integers")
        if any(len(s) != lv["order"] for s in gens):
            raise FormatError(f"{path}: every generator must list {lv['order']} images")
        qs.append(FiniteQuotient(tuple(tuple(s) for s in gens), lv["order"], lv.get("label", "")))
    if len({q.ngens for q in qs}) != 1:
        raise FormatError(f"{where}: levels disagree on the number of generators")
    maps = doc.get("maps")
    if maps is not None and (
        not isinstance(maps, list) or not all(isinstance(f, list) and all(isinstance(x, int) for x in f) for f in maps)
    ):
        raise FormatError(f"{where}: 'maps' must be a list of integer lists")
    tower = Tower(
        tuple(qs),
        None if maps is None else tuple(tuple(f) for f in maps),
        bool(doc.get("p_step_refinement", False)),
        dict(doc.get("meta", {})),
    )
    report = validate_tower(tower)
    if not report:
        raise FormatError(f"{where}: {report.reason}")
    return tower


def tower_to_dict(tower: Tower) -> dict:
    doc = {
        "format": FORMAT_VERSION,
        "levels": [
            {"order": q.order, "generators": [list(s) for s in q.generator_images], **({"label": q.label} if q.label else {})}
            for q in tower.quotients
        ],
    }
    if tower.maps is not None:
        doc["maps"] = [list(f) for f in tower.maps]
    if tower.p_step_refinement:
        doc["p_step_refinement"] = True
    return doc


def load_tower(path, strict: bool = True) -> Tower:
    return tower_from_dict(_read_json(path), strict, str(path))


def dump_tower(tower: Tower, path) -> None:
    write_json(path, tower_to_dict(tower))


# ---------------------------------------------------------------------------
# report writers


def format_cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        return f"{x:.12g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_cell(x)
    if isinstance(x, float):
        return format_cell(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(x) for x in row])
    atomic_write(path, buf.getvalue())


def write_json(path, obj) -> None:
    atomic_write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
