"""Tabular datasets with mixed numeric/nominal columns and a continuous target.

Columns are stored as a single float64 matrix: numeric columns hold parsed
values, nominal columns hold dense integer category codes (0, 1, ...).
Datasets are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DataFormatError,
    MissingCellError,
    MissingTargetError,
    UndeclaredCategoryError,
    UnparseableCellError,
)


class ColumnKind(Enum):
    NUMERIC = "numeric"
    NOMINAL = "nominal"


def _parse_number(cell: str) -> float | None:
    """Parse a finite float, or None if the cell is not a finite number."""
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


class Dataset:
    """An immutable n x p cell grid with one designated numeric target column."""

    def __init__(
        self,
        names: Sequence[str],
        kinds: Sequence[ColumnKind],
        categories: Sequence[tuple[str, ...] | None],
        X: np.ndarray,
        target_index: int,
    ):
        self.names = tuple(names)
        self.kinds = tuple(kinds)
        self.categories = tuple(tuple(c) if c is not None else None for c in categories)
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        self.X = X
        self.X.flags.writeable = False
        self.target_index = int(target_index)
        self._validate()

    def _validate(self):
        n, p = self.X.shape
        if p < 1 or n < 1:
            raise ValueError(f"dataset must have at least one row and one column, got {n}x{p}")
        if not (len(self.names) == len(self.kinds) == len(self.categories) == p):
            raise ValueError("names/kinds/categories must all have one entry per column")
        if not 0 <= self.target_index < p:
            raise ValueError(f"target_index {self.target_index} out of range for p={p}")
        if self.kinds[self.target_index] is not ColumnKind.NUMERIC:
            raise ValueError(f"target column {self.names[self.target_index]!r} must be numeric")
        for j, (kind, cats) in enumerate(zip(self.kinds, self.categories)):
            if kind is ColumnKind.NOMINAL:
                if not cats:
                    raise ValueError(f"nominal column {self.names[j]!r} has no categories")
                codes = self.X[:, j]
                if np.any((codes < 0) | (codes >= len(cats)) | (codes != np.floor(codes))):
                    raise ValueError(f"nominal column {self.names[j]!r} has invalid codes")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("dataset cells must all be finite")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def y(self) -> np.ndarray:
        """The target column values."""
        return self.X[:, self.target_index]

    def is_nominal(self, col: int) -> bool:
        return self.kinds[col] is ColumnKind.NOMINAL

    def numeric_indices(self) -> list[int]:
        return [j for j, k in enumerate(self.kinds) if k is ColumnKind.NUMERIC]

    def column_std(self, col: int) -> float:
        """Population (ddof=0) standard deviation of a numeric column."""
        if self.is_nominal(col):
            raise ValueError(f"column {self.names[col]!r} is nominal")
        return float(np.std(self.X[:, col]))

    def with_matrix(self, X: np.ndarray) -> "Dataset":
        """A dataset with the same schema but different rows."""
        return Dataset(self.names, self.kinds, self.categories, X, self.target_index)

    def row_subset(self, indices) -> "Dataset":
        return self.with_matrix(self.X[np.asarray(indices, dtype=np.intp)])

    def render_cell(self, i: int, j: int) -> str:
        """The cell as written to CSV: shortest round-trip decimal, or the category."""
        v = self.X[i, j]
        if self.is_nominal(j):
            return self.categories[j][int(v)]
        return repr(float(v))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.names == other.names
            and self.kinds == other.kinds
            and self.categories == other.categories
            and self.target_index == other.target_index
            and self.X.shape == other.X.shape
            and bool(np.array_equal(self.X, other.X))
        )

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, p={self.p}, target={self.names[self.target_index]!r})"


@dataclass(frozen=True)
class ColumnSummary:
    """Descriptive statistics for one column; numeric fields are None for nominal columns."""

    min: float | None = None
    max: float | None = None
    mean: float | None = None
    std: float | None = None
    q1: float | None = None
    median: float | None = None
    q3: float | None = None
    category_counts: dict[str, int] | None = None


def column_summary(ds: Dataset, col: int) -> ColumnSummary:
    """Summarize one column. Quartiles use linear interpolation between order
    statistics (the usual type-7 convention); std is population (ddof=0)."""
    if not 0 <= col < ds.p:
        raise ValueError(f"column index {col} out of range")
    values = ds.X[:, col]
    if ds.is_nominal(col):
        cats = ds.categories[col]
        codes, counts = np.unique(values.astype(np.intp), return_counts=True)
        return ColumnSummary(category_counts={cats[c]: int(k) for c, k in zip(codes, counts)})
    q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75])
    return ColumnSummary(
        min=float(values.min()),
        max=float(values.max()),
        mean=float(values.mean()),
        std=float(values.std()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
    )


def _build_dataset(
    names: list[str],
    kinds: list[ColumnKind],
    cells: list[list[str]],
    target: str,
    declared_categories: list[tuple[str, ...] | None] | None = None,
) -> Dataset:
    """Convert parsed string cells into the coded matrix representation.

    When ``declared_categories`` is given (ARFF), nominal codes follow the
    declaration order and undeclared values are rejected; otherwise (CSV)
    categories are coded in order of first appearance.
    """
    p = len(names)
    n = len(cells)
    target_index = names.index(target)
    X = np.empty((n, p), dtype=np.float64)
    categories: list[tuple[str, ...] | None] = [None] * p
    for j in range(p):
        column = [row[j] for row in cells]
        if kinds[j] is ColumnKind.NUMERIC:
            for i, cell in enumerate(column):
                value = _parse_number(cell)
                if value is None:
                    raise UnparseableCellError(
                        f"row {i + 1}, column {names[j]!r}: {cell!r} is not a finite number"
                    )
                X[i, j] = value
        else:
            if declared_categories is not None and declared_categories[j] is not None:
                cats = list(declared_categories[j])
                code_of = {c: k for k, c in enumerate(cats)}
                for i, cell in enumerate(column):
                    if cell not in code_of:
                        raise UndeclaredCategoryError(
                            f"row {i + 1}, column {names[j]!r}: value {cell!r} "
                            "is not in the attribute declaration"
                        )
                    X[i, j] = code_of[cell]
            else:
                code_of: dict[str, int] = {}
                for i, cell in enumerate(column):
                    if cell not in code_of:
                        code_of[cell] = len(code_of)
                    X[i, j] = code_of[cell]
                cats = list(code_of)
            categories[j] = tuple(cats)
    return Dataset(names, kinds, categories, X, target_index)


def load_csv(
    path: str | Path,
    target: str,
    kind_overrides: Mapping[str, ColumnKind] | None = None,
) -> Dataset:
    """Load a comma-separated file with a header row.

    Column kinds are inferred (a column in which every cell parses as a
    finite number is numeric, anything else nominal) and can be forced via
    ``kind_overrides``. The target column must end up numeric.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [[cell.strip() for cell in row] for row in reader if row]
    if not rows:
        raise DataFormatError(f"{path}: file is empty")
    names = rows[0]
    cells = rows[1:]
    if not cells:
        raise DataFormatError(f"{path}: no data rows after the header")
    if target not in names:
        raise MissingTargetError(f"{path}: target column {target!r} not in header {names}")
    p = len(names)
    for i, row in enumerate(cells):
        if len(row) != p or any(cell == "" for cell in row):
            raise MissingCellError(f"{path}: row {i + 1} does not have {p} non-empty cells")
    kinds = []
    for j in range(p):
        numeric = all(_parse_number(row[j]) is not None for row in cells)
        kinds.append(ColumnKind.NUMERIC if numeric else ColumnKind.NOMINAL)
    if kind_overrides:
        for name, kind in kind_overrides.items():
            if name not in names:
                raise DataFormatError(f"{path}: kind override for unknown column {name!r}")
            kinds[names.index(name)] = kind
    return _build_dataset(names, kinds, cells, target)


def _split_arff_values(line: str) -> list[str]:
    """Split a comma-separated ARFF row, honouring single and double quotes."""
    values = next(csv.reader([line], skipinitialspace=True))
    out = []
    for v in values:
        v = v.strip()
        if len(v) >= 2 and v[0] == v[-1] and v[0] in "'\"":
            v = v[1:-1]
        out.append(v)
    return out


def load_arff(path: str | Path, target: str) -> Dataset:
    """Load a dense ARFF file; kinds come from the @attribute declarations."""
    path = Path(path)
    names: list[str] = []
    kinds: list[ColumnKind] = []
    declared: list[tuple[str, ...] | None] = []
    cells: list[list[str]] = []
    in_data = False
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if not in_data and line.lower().startswith("@relation"):
                continue
            if not in_data and line.lower().startswith("@attribute"):
                rest = line[len("@attribute"):].strip()
                if rest.startswith(("'", '"')):
                    quote = rest[0]
                    end = rest.find(quote, 1)
                    if end < 0:
                        raise DataFormatError(f"{path}:{lineno}: unterminated attribute name")
                    name, type_spec = rest[1:end], rest[end + 1:].strip()
                else:
                    parts = rest.split(None, 1)
                    if len(parts) != 2:
                        raise DataFormatError(f"{path}:{lineno}: malformed @attribute line")
                    name, type_spec = parts
                names.append(name)
                if type_spec.startswith("{"):
                    if not type_spec.endswith("}"):
                        raise DataFormatError(f"{path}:{lineno}: unterminated nominal set")
                    kinds.append(ColumnKind.NOMINAL)
                    declared.append(tuple(_split_arff_values(type_spec[1:-1])))
                elif type_spec.lower() in ("numeric", "real", "integer"):
                    kinds.append(ColumnKind.NUMERIC)
                    declared.append(None)
                else:
                    raise DataFormatError(
                        f"{path}:{lineno}: unsupported attribute type {type_spec!r}"
                    )
                continue
            if not in_data and line.lower().startswith("@data"):
                if not names:
                    raise DataFormatError(f"{path}: @data before any @attribute")
                in_data = True
                continue
            if not in_data:
                raise DataFormatError(f"{path}:{lineno}: unexpected line before @data: {line!r}")
            if line.startswith("{"):
                raise DataFormatError(f"{path}:{lineno}: sparse ARFF data is not supported")
            row = _split_arff_values(line)
            if len(row) != len(names) or any(v == "" or v == "?" for v in row):
                raise MissingCellError(
                    f"{path}:{lineno}: expected {len(names)} non-missing values"
                )
            cells.append(row)
    if not names:
        raise DataFormatError(f"{path}: no @attribute declarations found")
    if not cells:
        raise DataFormatError(f"{path}: no data rows")
    if target not in names:
        raise MissingTargetError(f"{path}: target column {target!r} not declared")
    if kinds[names.index(target)] is not ColumnKind.NUMERIC:
        raise DataFormatError(f"{path}: target column {target!r} is not numeric")
    return _build_dataset(names, kinds, cells, target, declared_categories=declared)


def load_table(path: str | Path, target: str, fmt: str = "auto", **kwargs) -> Dataset:
    """Dispatch to the CSV or ARFF loader, by extension when ``fmt='auto'``."""
    if fmt == "auto":
        fmt = "arff" if str(path).lower().endswith(".arff") else "csv"
    if fmt == "arff":
        return load_arff(path, target)
    if fmt == "csv":
        return load_csv(path, target, **kwargs)
    raise ValueError(f"unknown format {fmt!r}")


def write_csv(ds: Dataset, path: str | Path, extra_columns: Mapping[str, Sequence[str]] | None = None):
    """Write the dataset as CSV with a header row.

    Numeric cells are rendered with Python's shortest round-trip float
    representation, so reloading reproduces the matrix bit-exactly.
    """
    extra = dict(extra_columns or {})
    for name, column in extra.items():
        if len(column) != ds.n:
            raise ValueError(f"extra column {name!r} has {len(column)} cells, expected {ds.n}")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ds.names) + list(extra))
        for i in range(ds.n):
            row = [ds.render_cell(i, j) for j in range(ds.p)]
            row.extend(str(extra[name][i]) for name in extra)
            writer.writerow(row)
