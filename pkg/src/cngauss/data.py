"""Data ingestion and the bundled reference datasets."""

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import NonNumericColumn, ParseError


@dataclass
class Dataset:
    """An n x p numeric table plus an optional categorical label column."""

    name: str
    values: np.ndarray       # (n, p) floats, the fitted columns
    columns: list            # names of the fitted columns
    labels: np.ndarray | None
    label_column: str | None
    provenance: str

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def replaced_cell(self, row: int, column: str, value: float) -> "Dataset":
        """Copy of the dataset with one numeric cell overwritten."""
        if column not in self.columns:
            raise KeyError(f"no column named {column!r}")
        if not 0 <= row < self.n:
            raise IndexError(f"row {row} outside 0..{self.n - 1}")
        values = self.values.copy()
        values[row, self.columns.index(column)] = value
        note = f"{self.provenance}; cell ({row}, {column}) set to {value}"
        return Dataset(self.name, values, list(self.columns),
                       None if self.labels is None else self.labels.copy(),
                       self.label_column, note)


def _parse_rows(text: str, source: str, delimiter: str):
    comments = []
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            comments.append(line.lstrip("#").strip())
        elif line.strip():
            lines.append(line)
    if not lines:
        raise ParseError(f"{source}: no header row found")
    reader = csv.reader(io.StringIO("\n".join(lines)), delimiter=delimiter)
    rows = list(reader)
    return rows[0], rows[1:], " ".join(comments)


def load_csv(
    path,
    delimiter: str = ",",
    label_column: str | None = None,
    standardize: bool = False,
    name: str | None = None,
) -> Dataset:
    """Load a numeric CSV with a header row.

    Lines starting with '#' are provenance comments. One column may be
    declared categorical via ``label_column``; every other cell must parse
    as a decimal number. ``standardize`` z-scores the numeric columns and
    records that in the provenance note.
    """
    path = Path(path)
    header, raw_rows, comments = _parse_rows(
        path.read_text(encoding="utf-8"), str(path), delimiter
    )
    return _dataset_from_rows(
        header, raw_rows, comments,
        name=name or path.stem,
        label_column=label_column,
        standardize=standardize,
    )


def _dataset_from_rows(header, raw_rows, comments, name, label_column, standardize):
    if label_column is not None and label_column not in header:
        raise ParseError(f"label column {label_column!r} is not in the header")
    numeric_names = [c for c in header if c != label_column]
    if not raw_rows or len(raw_rows) < 2:
        raise ParseError("need at least two data rows")

    failures = {c: 0 for c in numeric_names}
    values = np.empty((len(raw_rows), len(numeric_names)))
    labels = [] if label_column is not None else None
    first_bad = None
    for i, row in enumerate(raw_rows):
        if len(row) != len(header):
            raise ParseError(f"row {i + 1} has {len(row)} fields, expected {len(header)}")
        j = 0
        for col_name, cell in zip(header, row):
            if col_name == label_column:
                labels.append(cell)
                continue
            try:
                parsed = float(cell)
                if not np.isfinite(parsed):
                    raise ValueError
            except ValueError:
                failures[col_name] += 1
                if first_bad is None:
                    first_bad = (i + 1, col_name, cell)
                parsed = np.nan
            values[i, j] = parsed
            j += 1
    wholly_bad = [c for c, k in failures.items() if k == len(raw_rows)]
    if wholly_bad:
        raise NonNumericColumn(
            f"column(s) {wholly_bad} hold no numeric data; declare a label "
            "column or drop them"
        )
    if first_bad is not None:
        row, col, cell = first_bad
        raise ParseError(f"row {row}, column {col!r}: cannot parse {cell!r} as a number")

    provenance = comments or f"loaded from {name}"
    if standardize:
        sd = values.std(axis=0)
        sd[sd == 0.0] = 1.0
        values = (values - values.mean(axis=0)) / sd
        provenance += "; columns standardized to zero mean and unit variance"
    return Dataset(
        name=name,
        values=values,
        columns=numeric_names,
        labels=np.asarray(labels) if labels is not None else None,
        label_column=label_column,
        provenance=provenance,
    )


def _bundled(filename: str, label_column: str, name: str, standardize=False) -> Dataset:
    text = resources.files("cngauss").joinpath(f"data/{filename}").read_text(encoding="utf-8")
    header, raw_rows, comments = _parse_rows(text, filename, ",")
    return _dataset_from_rows(header, raw_rows, comments, name=name,
                              label_column=label_column, standardize=standardize)


def state_x77(standardize: bool = False) -> Dataset:
    """Fifty US states, eight 1970s socioeconomic and geographic variables."""
    return _bundled("state_x77.csv", "State", "state_x77", standardize)


def f_voles(standardize: bool = False) -> Dataset:
    """86 female voles of two species: age plus six skull measurements."""
    return _bundled("f_voles.csv", "Species", "f_voles", standardize)


BUNDLED = {"state_x77": state_x77, "f_voles": f_voles}


def bundled_dataset(name: str, standardize: bool = False) -> Dataset:
    key = name.replace(".", "_").removesuffix("_csv")
    if key not in BUNDLED:
        raise KeyError(f"no bundled dataset named {name!r}; have {sorted(BUNDLED)}")
    return BUNDLED[key](standardize)
