"""Tabular data container and CSV (de)serialization.

Cells are plain strings; a missing value is represented by ``None``.
The CSV dialect is fixed: comma separated, double-quote escaping, one
header row, UTF-8, LF line endings.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import DataError

Value = Optional[str]
Row = tuple[Value, ...]

DEFAULT_NULL_TOKEN = ""


@dataclass(frozen=True)
class Relation:
    """An ordered collection of rows over named attributes."""

    attributes: tuple[str, ...]
    rows: tuple[Row, ...] = field(default=())

    def __post_init__(self):
        if len(set(self.attributes)) != len(self.attributes):
            raise DataError("duplicate attribute names")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.attributes):
                raise DataError(
                    f"row {i} has {len(row)} cells, expected {len(self.attributes)}"
                )

    def __len__(self):
        return len(self.rows)

    def index_of(self, attribute: str) -> int:
        try:
            return self.attributes.index(attribute)
        except ValueError:
            raise DataError(f"unknown attribute {attribute!r}") from None

    def column(self, attribute: str) -> tuple[Value, ...]:
        idx = self.index_of(attribute)
        return tuple(row[idx] for row in self.rows)

    def row_mapping(self, i: int) -> dict[str, Value]:
        return dict(zip(self.attributes, self.rows[i]))

    def with_rows(self, rows: Iterable[Row]) -> "Relation":
        return Relation(self.attributes, tuple(rows))

    @classmethod
    def from_mappings(
        cls, attributes: Sequence[str], mappings: Iterable[Mapping[str, Value]]
    ) -> "Relation":
        attrs = tuple(attributes)
        rows = tuple(tuple(m.get(a) for a in attrs) for m in mappings)
        return cls(attrs, rows)


def _normalize(cell: str, null_token: str) -> Value:
    return None if cell == null_token else cell


def load_csv(path, null_token: str = DEFAULT_NULL_TOKEN) -> Relation:
    """Read a relation from a CSV file.

    Cells equal to ``null_token`` become missing values. Raises
    :class:`DataError` on a missing header, duplicate header names or
    ragged rows.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return read_csv(handle, null_token)


def read_csv(handle, null_token: str = DEFAULT_NULL_TOKEN) -> Relation:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("missing header row") from None
    if not header or all(name == "" for name in header):
        raise DataError("missing header row")
    if len(set(header)) != len(header):
        raise DataError("duplicate attribute names in header")
    rows = []
    for lineno, record in enumerate(reader, start=2):
        if len(record) != len(header):
            raise DataError(f"ragged row at line {lineno}")
        rows.append(tuple(_normalize(cell, null_token) for cell in record))
    return Relation(tuple(header), tuple(rows))


def save_csv(relation: Relation, path, null_token: str = DEFAULT_NULL_TOKEN) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        write_csv(relation, handle, null_token)


def write_csv(relation: Relation, handle, null_token: str = DEFAULT_NULL_TOKEN) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(relation.attributes)
    for row in relation.rows:
        writer.writerow([null_token if v is None else v for v in row])


def to_csv_text(relation: Relation, null_token: str = DEFAULT_NULL_TOKEN) -> str:
    buffer = io.StringIO()
    write_csv(relation, buffer, null_token)
    return buffer.getvalue()
