"""Knot records: data model, CSV/JSON ingestion and serialization.

CSV schema (UTF-8, header row, canonical column order)::

    name,crossings,alternating,jones,vol,longitude_length,meridian_length,
    mu_x,mu_y,cusp_volume,chern_simons,khovanov

* ``jones``: ``"min_exp;c0 c1 ... ck"`` with space-separated integer
  coefficients of t^(min_exp), t^(min_exp+1), ...
* ``khovanov``: semicolon-separated ``"i,j,c"`` triples (the field is
  quoted in CSV because of the commas); empty field means absent.
* empty numeric field = absent invariant; ``alternating`` is true/false.

The header may stop early (a prefix of the canonical columns) and data
rows may be shorter than the header; everything missing is treated as
absent. ``name``, ``crossings``, ``alternating`` and ``jones`` are
required.

The JSON schema is an array of objects with the same field names,
polynomials as ``{"min_exp": ..., "coeffs": [...]}`` and
``[{"i": ..., "j": ..., "c": ...}]``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import SchemaError
from .polynomials import LaurentPoly1, LaurentPoly2

__all__ = [
    "KnotClass",
    "HyperbolicInvariants",
    "KnotRecord",
    "Dataset",
    "parse_dataset",
    "serialize_dataset",
    "filter_class",
    "check_khovanov_alternating",
    "CSV_COLUMNS",
]

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "name",
    "crossings",
    "alternating",
    "jones",
    "vol",
    "longitude_length",
    "meridian_length",
    "mu_x",
    "mu_y",
    "cusp_volume",
    "chern_simons",
    "khovanov",
)

REQUIRED_COLUMNS = ("name", "crossings", "alternating", "jones")

# KnotInfo reports Chern-Simons modulo 1/2; every stored value is folded
# into this half-open window at ingestion.
CHERN_SIMONS_PERIOD = 0.5


class KnotClass(Enum):
    ALL = "all"
    ALTERNATING = "alternating"
    NON_ALTERNATING = "non_alternating"


@dataclass(frozen=True)
class HyperbolicInvariants:
    """Geometric target invariants; each may be absent in a data source.

    The longitude translation is not stored: with the orientation fixed so
    its second component vanishes, it is determined by longitude_length.
    """

    vol: Optional[float] = None
    longitude_length: Optional[float] = None
    meridian_length: Optional[float] = None
    mu_x: Optional[float] = None
    mu_y: Optional[float] = None
    cusp_volume: Optional[float] = None
    chern_simons: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("vol", "longitude_length", "meridian_length", "cusp_volume"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive, got {v}")
        cs = self.chern_simons
        if cs is not None and not (0.0 <= cs < CHERN_SIMONS_PERIOD):
            raise ValueError(f"chern_simons must lie in [0, 0.5), got {cs}")


@dataclass(frozen=True)
class KnotRecord:
    name: str
    crossing_number: int
    alternating: bool
    jones: LaurentPoly1
    khovanov: Optional[LaurentPoly2] = None
    hyperbolic: HyperbolicInvariants = HyperbolicInvariants()

    def __post_init__(self) -> None:
        if self.crossing_number <= 0:
            raise ValueError("crossing_number must be positive")


@dataclass(frozen=True)
class Dataset:
    records: tuple[KnotRecord, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        names = [r.name for r in self.records]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate record names: {dupes}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


# ---------------------------------------------------------------------------
# field grammars


def parse_jones_field(text: str) -> LaurentPoly1:
    head, sep, tail = text.partition(";")
    if not sep:
        raise ValueError("jones field must look like 'min_exp;c0 c1 ...'")
    try:
        min_exp = int(head.strip())
        coeffs = [int(tok) for tok in tail.split()]
    except ValueError as exc:
        raise ValueError(f"non-integer value in jones field: {exc}") from None
    if not coeffs:
        raise ValueError("jones field has no coefficients")
    return LaurentPoly1.make(min_exp, coeffs)


def format_jones_field(p: LaurentPoly1) -> str:
    return f"{p.min_exp};" + " ".join(str(c) for c in p.coeffs)


def parse_khovanov_field(text: str) -> LaurentPoly2:
    triples = []
    for chunk in text.split(";"):
        parts = chunk.split(",")
        if len(parts) != 3:
            raise ValueError(f"khovanov term {chunk!r} is not an 'i,j,c' triple")
        try:
            triples.append(tuple(int(x.strip()) for x in parts))
        except ValueError:
            raise ValueError(f"non-integer value in khovanov term {chunk!r}") from None
    return LaurentPoly2.make(triples)


def format_khovanov_field(p: LaurentPoly2) -> str:
    return ";".join(f"{i},{j},{c}" for i, j, c in p.terms)


def _parse_optional_float(text: str, column: str) -> Optional[float]:
    text = text.strip()
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"{column} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{column} must be finite: {text!r}")
    return value


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    raise ValueError(f"alternating must be true or false, got {text!r}")


def _build_record(values: dict[str, str]) -> KnotRecord:
    """Construct a KnotRecord from raw per-column strings (absent = '')."""
    name = values["name"].strip()
    if not name:
        raise ValueError("name is empty")
    try:
        crossings = int(values["crossings"])
    except ValueError:
        raise ValueError(f"crossings is not an integer: {values['crossings']!r}") from None
    alternating = _parse_bool(values["alternating"])
    jones = parse_jones_field(values["jones"])
    kh_text = values.get("khovanov", "").strip()
    khovanov = parse_khovanov_field(kh_text) if kh_text else None

    numeric = {
        key: _parse_optional_float(values.get(key, ""), key)
        for key in (
            "vol",
            "longitude_length",
            "meridian_length",
            "mu_x",
            "mu_y",
            "cusp_volume",
            "chern_simons",
        )
    }
    if numeric["chern_simons"] is not None:
        numeric["chern_simons"] = numeric["chern_simons"] % CHERN_SIMONS_PERIOD
    return KnotRecord(
        name=name,
        crossing_number=crossings,
        alternating=alternating,
        jones=jones,
        khovanov=khovanov,
        hyperbolic=HyperbolicInvariants(**numeric),
    )


# ---------------------------------------------------------------------------
# ingestion


def parse_dataset(path: str | Path, format: Optional[str] = None) -> Dataset:
    """Load a dataset from a CSV or JSON file.

    ``format`` is "csv" or "json"; by default it is inferred from the file
    suffix. Malformed rows are collected and reported together, each with
    its row number. Alternating records carrying Khovanov data that fails
    the diagonal consistency check are kept but logged as warnings.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"dataset file not found: {path}")
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format == "csv":
        records = _parse_csv(path)
    elif format == "json":
        records = _parse_json(path)
    else:
        raise ValueError(f"unknown dataset format: {format!r}")

    names = {}
    problems = []
    for row, rec in records:
        if rec.name in names:
            problems.append(
                f"row {row}: duplicate name {rec.name!r} (first seen at row {names[rec.name]})"
            )
        else:
            names[rec.name] = row
    if problems:
        raise SchemaError(f"{path}: " + "; ".join(problems))

    for row, rec in records:
        if rec.alternating and rec.khovanov is not None:
            if not check_khovanov_alternating(rec):
                logger.warning(
                    "%s (row %s): khovanov data fails the alternating diagonal check",
                    rec.name,
                    row,
                )
    return Dataset(tuple(rec for _, rec in records), provenance=str(path))


def _parse_csv(path: Path) -> list[tuple[int, KnotRecord]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a header row")
    header = [col.strip() for col in rows[0]]
    if tuple(header) != CSV_COLUMNS[: len(header)]:
        raise SchemaError(
            f"{path}: header {header} is not a prefix of the canonical columns "
            f"{list(CSV_COLUMNS)}"
        )
    missing = [col for col in REQUIRED_COLUMNS if col not in header]
    if missing:
        raise SchemaError(f"{path}: header is missing required columns {missing}")

    records = []
    problems = []
    for idx, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) > len(header):
            problems.append(f"row {idx}: {len(row)} fields but header has {len(header)}")
            continue
        values = dict(zip(header, row))
        try:
            records.append((idx, _build_record(values)))
        except KeyError as exc:
            problems.append(f"row {idx}: missing required field {exc}")
        except ValueError as exc:
            problems.append(f"row {idx}: {exc}")
    if problems:
        raise SchemaError(f"{path}: " + "; ".join(problems))
    return records


def _parse_json(path: Path) -> list[tuple[int, KnotRecord]]:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(payload, list):
        raise SchemaError(f"{path}: expected a JSON array of knot objects")

    records = []
    problems = []
    for idx, obj in enumerate(payload, start=1):
        try:
            records.append((idx, _record_from_json(obj)))
        except (ValueError, KeyError, TypeError) as exc:
            problems.append(f"entry {idx}: {exc}")
    if problems:
        raise SchemaError(f"{path}: " + "; ".join(problems))
    return records


def _record_from_json(obj: dict) -> KnotRecord:
    if not isinstance(obj, dict):
        raise ValueError(f"expected an object, got {type(obj).__name__}")
    jones = obj["jones"]
    values: dict[str, str] = {
        "name": str(obj["name"]),
        "crossings": str(obj["crossings"]),
        "alternating": "true" if obj["alternating"] else "false",
        "jones": f"{jones['min_exp']};" + " ".join(str(c) for c in jones["coeffs"]),
    }
    kh = obj.get("khovanov")
    if kh:
        values["khovanov"] = ";".join(f"{t['i']},{t['j']},{t['c']}" for t in kh)
    for key in (
        "vol",
        "longitude_length",
        "meridian_length",
        "mu_x",
        "mu_y",
        "cusp_volume",
        "chern_simons",
    ):
        v = obj.get(key)
        values[key] = "" if v is None else repr(float(v))
    return _build_record(values)


# ---------------------------------------------------------------------------
# serialization


def record_to_json(rec: KnotRecord) -> dict:
    hyp = rec.hyperbolic
    obj = {
        "name": rec.name,
        "crossings": rec.crossing_number,
        "alternating": rec.alternating,
        "jones": {"min_exp": rec.jones.min_exp, "coeffs": list(rec.jones.coeffs)},
        "khovanov": None
        if rec.khovanov is None
        else [{"i": i, "j": j, "c": c} for i, j, c in rec.khovanov.terms],
    }
    for f in fields(HyperbolicInvariants):
        obj[f.name] = getattr(hyp, f.name)
    return obj


def serialize_dataset(ds: Dataset, path: str | Path, format: Optional[str] = None) -> None:
    """Write a dataset back out; the result re-parses to equal records."""
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for rec in ds.records:
                hyp = rec.hyperbolic
                writer.writerow(
                    [
                        rec.name,
                        rec.crossing_number,
                        "true" if rec.alternating else "false",
                        format_jones_field(rec.jones),
                        *(
                            "" if v is None else repr(float(v))
                            for v in (
                                hyp.vol,
                                hyp.longitude_length,
                                hyp.meridian_length,
                                hyp.mu_x,
                                hyp.mu_y,
                                hyp.cusp_volume,
                                hyp.chern_simons,
                            )
                        ),
                        "" if rec.khovanov is None else format_khovanov_field(rec.khovanov),
                    ]
                )
    elif format == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump([record_to_json(r) for r in ds.records], fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ValueError(f"unknown dataset format: {format!r}")


# ---------------------------------------------------------------------------
# queries


def filter_class(ds: Dataset, knot_class: KnotClass) -> Dataset:
    """Records matching the class, order preserved; ALL is the identity."""
    if knot_class is KnotClass.ALL:
        return ds
    keep = knot_class is KnotClass.ALTERNATING
    return Dataset(
        tuple(r for r in ds.records if r.alternating == keep),
        provenance=ds.provenance,
    )


def check_khovanov_alternating(rec: KnotRecord) -> bool:
    """Sanity check the thinness property of alternating Khovanov data.

    True iff every Khovanov term sits on one diagonal (constant j - 2i,
    with the offset read from the data, since published grading
    conventions differ) and the coefficient sequence along that diagonal
    equals the Jones coefficients up to one overall sign.
    """
    if rec.khovanov is None:
        raise ValueError(f"{rec.name}: no khovanov data to check")
    terms = rec.khovanov.terms
    if not terms:
        return False
    offset = terms[0][1] - 2 * terms[0][0]
    if any(j - 2 * i != offset for i, j, _ in terms):
        return False
    by_i = {i: c for i, _, c in terms}
    i_min, i_max = min(by_i), max(by_i)
    seq = tuple(by_i.get(i, 0) for i in range(i_min, i_max + 1))
    jones = rec.jones.coeffs
    return seq == jones or seq == tuple(-c for c in jones)
