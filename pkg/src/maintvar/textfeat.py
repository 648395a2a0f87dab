"""Flag-word / stop-word extraction of maintenance and weather indicators.

Log text is normalised (lowercase, punctuation to spaces, whitespace
collapsed) and matched as whole-token phrases. A stop phrase vetoes a flag
occurrence only when their token spans overlap, so "no module cleaning"
suppresses the "module cleaning" inside it without erasing an unrelated
"module cleaning" elsewhere in the same entry.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from maintvar.errors import AlreadyScaled, DataError, EmptyDataset, LexiconError
from maintvar.ingest import PlantDataset

TARGET_LABEL = "Total generation (KWH)"
_NON_WORD = re.compile(r"[^0-9a-z]+")


def normalize(text: str) -> list[str]:
    return _NON_WORD.sub(" ", text.lower()).split()


def _phrase(text: str) -> tuple[str, ...]:
    return tuple(normalize(text))


@dataclass(frozen=True)
class LexiconEntry:
    flags: tuple[tuple[str, ...], ...]
    stops: tuple[tuple[str, ...], ...] = ()


class FeatureLexicon:
    """Ordered label -> (flag phrases, stop phrases) map."""

    def __init__(self, entries: Mapping[str, tuple[Iterable[str], Iterable[str]]] | None = None):
        self._entries: dict[str, LexiconEntry] = {}
        for label, (flags, stops) in (entries or {}).items():
            self._add(label, flags, stops)

    def _add(self, label: str, flags: Iterable[str], stops: Iterable[str]) -> None:
        label = label.strip()
        if not label:
            raise LexiconError("empty label")
        if label in self._entries:
            raise LexiconError(f"duplicate label {label!r}")
        fl = tuple(dict.fromkeys(p for p in map(_phrase, flags) if p))
        st = tuple(dict.fromkeys(p for p in map(_phrase, stops) if p))
        if not fl:
            raise LexiconError(f"label {label!r} has no flag phrases")
        clash = set(fl) & set(st)
        if clash:
            phrase = " ".join(sorted(clash)[0])
            raise LexiconError(f"label {label!r}: {phrase!r} is both a flag and a stop phrase")
        self._entries[label] = LexiconEntry(fl, st)

    @property
    def labels(self) -> list[str]:
        return list(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, label: str) -> LexiconEntry:
        return self._entries[label]

    def items(self):
        return self._entries.items()

    def with_flag(self, label: str, phrase: str) -> "FeatureLexicon":
        """Copy of this lexicon with one more flag phrase under ``label``."""
        out = FeatureLexicon()
        for lab, e in self._entries.items():
            flags = [" ".join(p) for p in e.flags]
            if lab == label:
                flags.append(phrase)
            out._add(lab, flags, [" ".join(p) for p in e.stops])
        return out

    @classmethod
    def parse(cls, text: str, source: str = "<lexicon>") -> "FeatureLexicon":
        lex = cls()
        label = None
        fields: dict[str, list[str]] = {}

        def flush():
            if label is not None:
                lex._add(label, fields.get("flags", []), fields.get("stops", []))

        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                flush()
                label, fields = line[1:-1].strip(), {}
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in ("flags", "stops") or label is None:
                raise LexiconError(f"{source}:{lineno}: expected 'flags = ...' or 'stops = ...' under a [label]")
            if key in fields:
                raise LexiconError(f"{source}:{lineno}: repeated {key!r} for [{label}]")
            fields[key] = [p.strip() for p in value.split(";") if p.strip()]
        flush()
        return lex

    @classmethod
    def load(cls, path: str | Path) -> "FeatureLexicon":
        path = Path(path)
        return cls.parse(path.read_text(encoding="utf-8"), str(path))

    @classmethod
    def default(cls) -> "FeatureLexicon":
        text = resources.files("maintvar").joinpath("data/default_lexicon.txt").read_text(encoding="utf-8")
        return cls.parse(text, "default_lexicon.txt")

    def dumps(self) -> str:
        blocks = []
        for label, e in self._entries.items():
            blocks.append(
                f"[{label}]\n"
                f"flags = {'; '.join(' '.join(p) for p in e.flags)}\n"
                f"stops = {'; '.join(' '.join(p) for p in e.stops)}\n"
            )
        return "\n".join(blocks)


def _spans(tokens: Sequence[str], phrase: tuple[str, ...]) -> list[tuple[int, int]]:
    n = len(phrase)
    return [(i, i + n) for i in range(len(tokens) - n + 1) if tuple(tokens[i : i + n]) == phrase]


def extract_labels(text: str, lexicon: FeatureLexicon) -> set[str]:
    tokens = normalize(text)
    if not tokens:
        return set()
    found = set()
    for label, entry in lexicon.items():
        stop_spans = [s for stop in entry.stops for s in _spans(tokens, stop)]
        for flag in entry.flags:
            if any(
                not any(a < d and c < b for c, d in stop_spans)
                for a, b in _spans(tokens, flag)
            ):
                found.add(label)
                break
    return found


@dataclass(frozen=True)
class FeatureMatrix:
    """Date-indexed numeric matrix; the target column, if any, is last."""

    dates: tuple
    labels: tuple[str, ...]
    values: np.ndarray
    scaling_mode: str = "binary"
    target: str | None = TARGET_LABEL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape != (len(self.dates), len(self.labels)):
            raise ValueError(f"values shape {v.shape} does not match {len(self.dates)} dates x {len(self.labels)} labels")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.target is not None and self.target not in self.labels:
            object.__setattr__(self, "target", None)

    @property
    def indicator_labels(self) -> list[str]:
        return [lab for lab in self.labels if lab != self.target]

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def select(self, labels: Sequence[str]) -> "FeatureMatrix":
        idx = [self.labels.index(lab) for lab in labels]
        return dataclasses.replace(self, labels=tuple(labels), values=self.values[:, idx])

    def head(self, n: int) -> "FeatureMatrix":
        return dataclasses.replace(self, dates=self.dates[:n], values=self.values[:n])

    def tail(self, n: int) -> "FeatureMatrix":
        start = len(self.dates) - n
        return dataclasses.replace(self, dates=self.dates[start:], values=self.values[start:])

    def __len__(self) -> int:
        return len(self.dates)


def build_feature_matrix(ds: PlantDataset, lexicon: FeatureLexicon) -> FeatureMatrix:
    if not len(ds):
        raise EmptyDataset("dataset has no records")
    labels = lexicon.labels
    vals = np.zeros((len(ds), len(labels) + 1))
    for r, rec in enumerate(ds.records):
        hits = extract_labels(rec.issues_text, lexicon)
        for c, lab in enumerate(labels):
            if lab in hits:
                vals[r, c] = 1.0
        vals[r, -1] = np.nan if rec.total_kwh is None else rec.total_kwh
    return FeatureMatrix(tuple(ds.dates), tuple(labels) + (TARGET_LABEL,), vals, "binary", TARGET_LABEL)


def occurrence_scale(fm: FeatureMatrix) -> FeatureMatrix:
    """Replace each indicator's ones with the column occurrence rate in percent."""
    if fm.scaling_mode != "binary":
        raise AlreadyScaled("feature matrix is already occurrence-scaled")
    vals = fm.values.copy()
    n = vals.shape[0]
    for c, lab in enumerate(fm.labels):
        if lab == fm.target:
            continue
        col = vals[:, c]
        k = int(np.count_nonzero(col))
        if k:
            col[col != 0] = 100.0 * k / n
    return dataclasses.replace(fm, values=vals, scaling_mode="occurrence_pct")


def write_matrix_csv(fm: FeatureMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *fm.labels])
        for d, row in zip(fm.dates, fm.values):
            w.writerow([str(d), *(repr(float(v)) for v in row)])


def read_matrix_csv(path: str | Path, target: str | None = TARGET_LABEL) -> FeatureMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: empty matrix file") from None
        rows = [r for r in reader if r]
    if not header or header[0] != "date":
        raise DataError(f"{path}: first column must be 'date'")
    if not rows:
        raise EmptyDataset(f"{path}: matrix has no rows")
    dates = []
    for r in rows:
        try:
            dates.append(dt.date.fromisoformat(r[0]))
        except ValueError:
            dates.append(r[0])
    values = np.array([[float(x) for x in r[1:]] for r in rows], dtype=np.float64)
    labels = tuple(header[1:])
    values = values.reshape(len(rows), len(labels))
    mode = "binary"
    for c, lab in enumerate(labels):
        if lab == target:
            continue
        nz = values[:, c][values[:, c] != 0]
        if nz.size and not np.all(nz == 1.0):
            mode = "occurrence_pct"
    return FeatureMatrix(tuple(dates), labels, values, mode, target)
