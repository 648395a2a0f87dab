"""Parsing, validation and gap repair for the 13-column daily plant log."""

from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from maintvar.errors import (
    AllMissingColumn,
    BadDate,
    DuplicateDate,
    EmptyFile,
    LeadingGap,
    MissingColumn,
)

ARRAY_FIELDS = tuple(f"array_{i}_kwh" for i in range(1, 6))
SCALAR_FIELDS = (
    "total_kwh",
    "aggregate_meter_kwh",
    "difference_kwh",
    "seeds_kwh",
    "insolation",
    "pr_pct",
)
NUMERIC_FIELDS = ARRAY_FIELDS + SCALAR_FIELDS
LOGICAL_COLUMNS = ("date",) + NUMERIC_FIELDS + ("issues_text",)

DEFAULT_HEADERS = {
    "date": "date",
    "array_1_kwh": "Poly-crystalline 1 (KWH)",
    "array_2_kwh": "Poly-crystalline 2 (KWH)",
    "array_3_kwh": "Poly-crystalline 3 (KWH)",
    "array_4_kwh": "Thin film (KWH)",
    "array_5_kwh": "CPV (KWH)",
    "total_kwh": "Total power generation (KWH)",
    "aggregate_meter_kwh": "aggregate meter reading (KWH)",
    "difference_kwh": "difference",
    "seeds_kwh": "Seeds data (KWH)",
    "insolation": "insolation",
    "pr_pct": "PR (%)",
    "issues_text": "any issues/problems observed",
}

MISSING_MARKERS = frozenset({"", "n/a", "na", "-"})
NON_NEGATIVE = ARRAY_FIELDS + ("total_kwh", "aggregate_meter_kwh", "seeds_kwh", "insolation")
PR_BOUNDS = (0.0, 200.0)
POLICIES = ("forward_fill", "linear", "drop")


@dataclass(frozen=True)
class Schema:
    """Logical column name -> CSV header name, plus the date format."""

    headers: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_HEADERS))
    date_format: str = "iso"  # "iso" (YYYY-MM-DD) or "dmy" (DD/MM/YYYY)

    @classmethod
    def load(cls, path: str | Path) -> "Schema":
        """Read a ``logical_name = header_name`` mapping file.

        ``date_format = dmy`` is accepted as an option line. Blank lines and
        ``#`` comments are ignored. Unmapped logical names keep their default
        header.
        """
        headers = dict(DEFAULT_HEADERS)
        date_format = "iso"
        for key, value in read_key_values(path).items():
            if key == "date_format":
                date_format = value
            elif key in DEFAULT_HEADERS:
                headers[key] = value
            else:
                raise ValueError(f"{path}: unknown logical column {key!r}")
        if date_format not in ("iso", "dmy"):
            raise ValueError(f"{path}: date_format must be 'iso' or 'dmy'")
        return cls(headers=headers, date_format=date_format)


def read_key_values(path: str | Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class DailyRecord:
    date: dt.date
    array_kwh: tuple[float | None, ...]
    total_kwh: float | None
    aggregate_meter_kwh: float | None
    difference_kwh: float | None
    seeds_kwh: float | None
    insolation: float | None
    pr_pct: float | None
    issues_text: str = ""

    def get(self, name: str) -> float | None:
        if name.startswith("array_"):
            return self.array_kwh[int(name[6]) - 1]
        return getattr(self, name)

    def with_values(self, values: Mapping[str, float | None]) -> "DailyRecord":
        arrays = list(self.array_kwh)
        scalars = {}
        for name, v in values.items():
            if name.startswith("array_"):
                arrays[int(name[6]) - 1] = v
            else:
                scalars[name] = v
        return dataclasses.replace(self, array_kwh=tuple(arrays), **scalars)

    def missing_fields(self) -> list[str]:
        return [f for f in NUMERIC_FIELDS if self.get(f) is None]


@dataclass(frozen=True)
class GapEntry:
    date: dt.date
    field: str  # a numeric field name, or "*" for a whole absent row
    reason: str


@dataclass(frozen=True)
class PlantDataset:
    records: tuple[DailyRecord, ...]
    source: str = ""
    row_count: int = 0
    gap_report: tuple[GapEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    @property
    def dates(self) -> list[dt.date]:
        return [r.date for r in self.records]

    def column(self, name: str) -> list[float | None]:
        return [r.get(name) for r in self.records]


@dataclass(frozen=True)
class Violation:
    date: dt.date
    field: str
    rule: str


def parse_date(text: str, date_format: str = "iso") -> dt.date:
    text = text.strip()
    try:
        if date_format == "dmy":
            return dt.datetime.strptime(text, "%d/%m/%Y").date()
        return dt.date.fromisoformat(text)
    except ValueError:
        raise BadDate(f"unparseable date {text!r} (format {date_format})") from None


def _parse_number(text: str) -> tuple[float | None, str | None]:
    """Return (value, reason-if-missing)."""
    s = text.strip()
    if s.lower() in MISSING_MARKERS:
        return None, "missing"
    try:
        v = float(s.replace(",", ""))
    except ValueError:
        return None, f"unparseable {s!r}"
    if not math.isfinite(v):
        return None, f"unparseable {s!r}"
    return v, None


def parse_dataset_csv(path: str | Path, schema: Schema | None = None) -> PlantDataset:
    """Read a plant log CSV into a date-ordered, evenly spaced dataset.

    Unparseable or missing numeric cells become ``None`` and are listed in the
    gap report. Dates absent from the file are materialised as all-missing
    rows so the series stays evenly spaced.
    """
    schema = schema or Schema()
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if header and header[0].startswith("﻿"):
            header[0] = header[0][1:]
        positions = {}
        for logical in LOGICAL_COLUMNS:
            name = schema.headers[logical]
            if name not in header:
                raise MissingColumn(f"{path}: column {logical!r} (header {name!r}) not found")
            positions[logical] = header.index(name)
        rows = [row for row in reader if any(cell.strip() for cell in row)]

    if not rows:
        raise EmptyFile(f"{path}: no data rows")

    parsed: dict[dt.date, DailyRecord] = {}
    gaps: list[GapEntry] = []
    for row in rows:
        row = row + [""] * (len(header) - len(row))
        date = parse_date(row[positions["date"]], schema.date_format)
        if date in parsed:
            raise DuplicateDate(f"{path}: duplicate date {date.isoformat()}")
        values: dict[str, float | None] = {}
        for name in NUMERIC_FIELDS:
            v, reason = _parse_number(row[positions[name]])
            values[name] = v
            if reason is not None:
                gaps.append(GapEntry(date, name, reason))
        parsed[date] = DailyRecord(
            date=date,
            array_kwh=tuple(values[a] for a in ARRAY_FIELDS),
            total_kwh=values["total_kwh"],
            aggregate_meter_kwh=values["aggregate_meter_kwh"],
            difference_kwh=values["difference_kwh"],
            seeds_kwh=values["seeds_kwh"],
            insolation=values["insolation"],
            pr_pct=values["pr_pct"],
            issues_text=row[positions["issues_text"]].strip(),
        )

    dates = sorted(parsed)
    records = []
    day = dt.timedelta(days=1)
    for prev, cur in zip([None] + dates[:-1], dates):
        if prev is not None:
            d = prev + day
            while d < cur:
                records.append(_blank_record(d))
                gaps.append(GapEntry(d, "*", "absent date"))
                d += day
        records.append(parsed[cur])
    gaps.sort(key=lambda g: (g.date, _field_rank(g.field)))
    return PlantDataset(tuple(records), str(path), len(rows), tuple(gaps))


def _blank_record(date: dt.date) -> DailyRecord:
    return DailyRecord(date, (None,) * 5, None, None, None, None, None, None, "")


def _field_rank(name: str) -> int:
    return -1 if name == "*" else NUMERIC_FIELDS.index(name)


def _format_number(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def write_dataset_csv(ds: PlantDataset, path: str | Path, schema: Schema | None = None) -> None:
    schema = schema or Schema()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([schema.headers[c] for c in LOGICAL_COLUMNS])
        for r in ds.records:
            if schema.date_format == "dmy":
                date = r.date.strftime("%d/%m/%Y")
            else:
                date = r.date.isoformat()
            w.writerow([date] + [_format_number(r.get(f)) for f in NUMERIC_FIELDS] + [r.issues_text])


def validate_dataset(ds: PlantDataset) -> list[Violation]:
    out = []
    prev = None
    for r in ds.records:
        if prev is not None and r.date <= prev:
            out.append(Violation(r.date, "date", "strictly increasing"))
        prev = r.date
        for name in NON_NEGATIVE:
            v = r.get(name)
            if v is not None and v < 0:
                out.append(Violation(r.date, name, "non-negative"))
        if r.pr_pct is not None and not PR_BOUNDS[0] <= r.pr_pct <= PR_BOUNDS[1]:
            out.append(Violation(r.date, "pr_pct", "pr within [0, 200]"))
    return out


def impute_missing(ds: PlantDataset, policy: str = "linear") -> PlantDataset:
    """Fill numeric gaps. Missing issue text is already the empty string.

    ``linear`` interpolates interior gaps and holds the nearest observed value
    at the ends; ``forward_fill`` carries the last value forward and refuses a
    leading gap; ``drop`` removes every row with any missing numeric cell.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown imputation policy {policy!r}; expected one of {POLICIES}")
    records = list(ds.records)
    if not records:
        return ds
    missing = {f: [i for i, r in enumerate(records) if r.get(f) is None] for f in NUMERIC_FIELDS}
    if not any(missing.values()):
        return ds

    gaps = [g for g in ds.gap_report]
    if policy == "drop":
        bad = {i for idxs in missing.values() for i in idxs}
        dropped = {records[i].date for i in bad}
        gaps = [g for g in gaps if g.date not in dropped]
        gaps += [GapEntry(d, "*", "dropped") for d in sorted(dropped)]
        gaps.sort(key=lambda g: (g.date, _field_rank(g.field)))
        kept = tuple(r for i, r in enumerate(records) if i not in bad)
        return dataclasses.replace(ds, records=kept, gap_report=tuple(gaps))

    filled: dict[str, list[float]] = {}
    for name, idxs in missing.items():
        if not idxs:
            continue
        col = [r.get(name) for r in records]
        if len(idxs) == len(col):
            raise AllMissingColumn(f"column {name!r} has no observed values")
        if policy == "forward_fill":
            filled[name] = _forward_fill(col, name, records)
        else:
            filled[name] = _linear_fill(col)

    imputed = []
    for i, r in enumerate(records):
        updates = {name: filled[name][i] for name in filled if r.get(name) is None}
        imputed.append(r.with_values(updates) if updates else r)

    marked = {(records[i].date, name) for name, idxs in missing.items() for i in idxs}
    reason = f"imputed ({policy})"
    gaps = [g for g in gaps if (g.date, g.field) not in marked]
    gaps += [GapEntry(d, f, reason) for d, f in marked]
    gaps.sort(key=lambda g: (g.date, _field_rank(g.field)))
    return dataclasses.replace(ds, records=tuple(imputed), gap_report=tuple(gaps))


def _forward_fill(col, name, records):
    if col[0] is None:
        raise LeadingGap(f"column {name!r} is missing on the first date {records[0].date}")
    out, last = [], col[0]
    for v in col:
        if v is not None:
            last = v
        out.append(last)
    return out


def _linear_fill(col):
    known = [i for i, v in enumerate(col) if v is not None]
    out = list(col)
    for i in range(known[0]):
        out[i] = col[known[0]]
    for i in range(known[-1] + 1, len(col)):
        out[i] = col[known[-1]]
    for a, b in zip(known, known[1:]):
        if b - a > 1:
            va, vb = col[a], col[b]
            for i in range(a + 1, b):
                w = (i - a) / (b - a)
                out[i] = va + (vb - va) * w
    return out
