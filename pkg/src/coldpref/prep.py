"""Tabular ingestion and cleaning: categorical encoding, imputation,
standardization, plus a synthetic-dataset generator for desk-scale runs.

The cleaning steps are pure transformations over an immutable column-major
table, so the same input always produces the same output and prepared
datasets can be shared read-only across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

MISSING_TOKENS = {"", "NA"}

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# Guards against degenerate inputs.
ZERO_VARIANCE_EPS = 1e-12
MIN_ROWS = 3


@dataclass
class PrepReport:
    """Audit trail of everything the cleaning pipeline did to a table."""

    dropped_columns: list[tuple[str, str]] = field(default_factory=list)
    imputations: list[tuple[str, int, str]] = field(default_factory=list)
    encodings: list[tuple[str, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def copy(self) -> "PrepReport":
        return PrepReport(
            dropped_columns=list(self.dropped_columns),
            imputations=list(self.imputations),
            encodings=list(self.encodings),
            notes=list(self.notes),
        )

    def to_text(self) -> str:
        lines = ["prep report", "==========="]
        for name, reason in self.dropped_columns:
            lines.append(f"dropped column {name!r}: {reason}")
        for name, count, method in self.imputations:
            lines.append(f"imputed {count} value(s) in {name!r} with {method}")
        for name, how in self.encodings:
            lines.append(f"encoded {name!r}: {how}")
        lines.extend(self.notes)
        if len(lines) == 2:
            lines.append("no changes")
        return "\n".join(lines) + "\n"


@dataclass
class Column:
    name: str
    kind: str  # NUMERIC or CATEGORICAL
    values: list  # float/str entries, None marks a missing value

    def missing_count(self) -> int:
        return sum(1 for v in self.values if v is None)


@dataclass
class RawTable:
    """Column-major table with a designated numeric target column."""

    columns: list[Column]
    target_column: str
    report: PrepReport = field(default_factory=PrepReport)

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        if self.target_column not in names:
            raise ValueError(f"target column {self.target_column!r} not found")
        if len(self.columns) < 2:
            raise ValueError("table needs at least one feature column plus the target")
        if self.column(self.target_column).kind != NUMERIC:
            raise ValueError(f"target column {self.target_column!r} is not numeric")
        n_rows = {len(c.values) for c in self.columns}
        if len(n_rows) != 1:
            raise ValueError("ragged table: columns differ in length")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values)

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    def feature_columns(self) -> list[Column]:
        return [c for c in self.columns if c.name != self.target_column]


@dataclass
class PreparedDataset:
    """Standardized feature matrix plus the true targets.

    The targets are only for the oracle simulation and test-set labeling;
    learners never see them directly.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    prep_report: PrepReport

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def validate(self) -> None:
        if not np.all(np.isfinite(self.X)):
            raise ValueError("feature matrix contains non-finite values")
        if len(self.y) != self.n:
            raise ValueError("target length does not match row count")
        means = self.X.mean(axis=0)
        variances = self.X.var(axis=0)
        if np.any(np.abs(means) > 1e-9):
            raise ValueError("feature columns are not centered")
        if np.any(np.abs(variances - 1.0) > 1e-6):
            raise ValueError("feature columns are not unit variance")


def _parse_cell(token: str) -> tuple[float | str | None, bool]:
    """Return (value, is_numeric) for one CSV cell."""
    token = token.strip()
    if token in MISSING_TOKENS:
        return None, True
    try:
        return float(token), True
    except ValueError:
        return token, False


def read_csv(path: str, target_column: str, drop_columns: tuple[str, ...] = ()) -> RawTable:
    """Load a header-first CSV into a RawTable.

    Missing values are empty cells or the literal "NA". A column is numeric
    when every non-missing cell parses as a float.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty input file") from None
        rows = [row for row in reader if row]
    header = [name.strip() for name in header]
    if target_column not in header:
        raise ValueError(f"target column {target_column!r} not found in header")
    for row in rows:
        if len(row) != len(header):
            raise ValueError("malformed CSV: row width differs from header")

    report = PrepReport()
    columns = []
    for j, name in enumerate(header):
        if name in drop_columns and name != target_column:
            report.dropped_columns.append((name, "listed in drop configuration"))
            continue
        parsed = [_parse_cell(row[j]) for row in rows]
        numeric = all(ok for _, ok in parsed)
        if numeric:
            columns.append(Column(name, NUMERIC, [v for v, _ in parsed]))
        else:
            values = [None if v is None else str(v) for v, _ in parsed]
            columns.append(Column(name, CATEGORICAL, values))
    return RawTable(columns, target_column, report)


def encode_categoricals(table: RawTable, onehot_max_cardinality: int = 10) -> RawTable:
    """Replace every categorical column with numeric ones.

    Low-cardinality columns expand to one 0/1 indicator per distinct value
    (lexicographic column order). High-cardinality columns map each value
    to its descending-frequency rank, most frequent first, ties broken by
    lexicographic value order. Single-valued columns are dropped.
    """
    if onehot_max_cardinality < 2:
        raise ValueError("onehot_max_cardinality must be at least 2")
    report = table.report.copy()
    columns: list[Column] = []
    for col in table.columns:
        if col.kind != CATEGORICAL:
            columns.append(Column(col.name, col.kind, list(col.values)))
            continue
        present = [v for v in col.values if v is not None]
        distinct = sorted(set(present))
        if len(distinct) <= 1:
            report.dropped_columns.append((col.name, "single distinct value"))
            continue
        if len(distinct) <= onehot_max_cardinality:
            for level in distinct:
                indicator = [
                    None if v is None else (1.0 if v == level else 0.0)
                    for v in col.values
                ]
                columns.append(Column(f"{col.name}={level}", NUMERIC, indicator))
            report.encodings.append(
                (col.name, f"one-hot into {len(distinct)} indicator columns")
            )
        else:
            counts = {level: 0 for level in distinct}
            for v in present:
                counts[v] += 1
            ordering = sorted(distinct, key=lambda level: (-counts[level], level))
            rank = {level: float(i) for i, level in enumerate(ordering)}
            encoded = [None if v is None else rank[v] for v in col.values]
            columns.append(Column(col.name, NUMERIC, encoded))
            report.encodings.append(
                (col.name, f"frequency rank over {len(distinct)} values")
            )
    if not any(c.name != table.target_column for c in columns):
        raise ValueError("no usable features")
    return RawTable(columns, table.target_column, report)


def _median(values: list[float]) -> float:
    return float(np.median(np.asarray(values, dtype=float)))


def _mode(values: list[str]) -> str:
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return min(counts, key=lambda v: (-counts[v], v))


def impute_missing(table: RawTable, drop_threshold: float = 0.5) -> RawTable:
    """Fill or drop missing values.

    Feature columns whose missing fraction exceeds ``drop_threshold`` are
    dropped. Remaining numeric gaps take the column median, categorical
    gaps the column mode. Rows with a missing target are removed.
    """
    if not 0.0 <= drop_threshold <= 1.0:
        raise ValueError("drop_threshold must be in [0, 1]")
    report = table.report.copy()
    n = table.n_rows
    columns: list[Column] = []
    for col in table.columns:
        if col.name == table.target_column:
            columns.append(Column(col.name, col.kind, list(col.values)))
            continue
        missing = col.missing_count()
        if missing == n:
            report.dropped_columns.append((col.name, "all values missing"))
            continue
        if n > 0 and missing / n > drop_threshold:
            report.dropped_columns.append(
                (col.name, f"missing fraction {missing / n:.3f} above threshold")
            )
            continue
        values = list(col.values)
        if missing:
            present = [v for v in values if v is not None]
            if col.kind == NUMERIC:
                fill: float | str = _median(present)
                method = "median"
            else:
                fill = _mode(present)
                method = "mode"
            values = [fill if v is None else v for v in values]
            report.imputations.append((col.name, missing, method))
        columns.append(Column(col.name, col.kind, values))

    if not any(c.name != table.target_column for c in columns):
        raise ValueError("no usable features")

    target = next(c for c in columns if c.name == table.target_column)
    keep = [i for i, v in enumerate(target.values) if v is not None]
    if len(keep) != n:
        report.notes.append(f"dropped {n - len(keep)} row(s) with missing target")
        for col in columns:
            col.values = [col.values[i] for i in keep]
    return RawTable(columns, table.target_column, report)


def standardize(table: RawTable) -> PreparedDataset:
    """Scale every feature column to zero mean and unit variance.

    Uses the population standard deviation. Columns with (near) zero
    variance are dropped and reported. The target passes through unscaled.
    """
    report = table.report.copy()
    for col in table.columns:
        if col.missing_count():
            raise ValueError(f"column {col.name!r} still has missing values; impute first")
        if col.kind != NUMERIC:
            raise ValueError(f"column {col.name!r} is not numeric; encode first")
    if table.n_rows < MIN_ROWS:
        raise ValueError("dataset too small")

    names: list[str] = []
    standardized: list[np.ndarray] = []
    for col in table.feature_columns():
        values = np.asarray(col.values, dtype=float)
        std = float(values.std())
        if std < ZERO_VARIANCE_EPS:
            report.dropped_columns.append((col.name, "zero variance"))
            continue
        standardized.append((values - values.mean()) / std)
        names.append(col.name)
    if not names:
        raise ValueError("no usable features")

    X = np.column_stack(standardized)
    y = np.asarray(table.column(table.target_column).values, dtype=float)
    return PreparedDataset(X=X, y=y, feature_names=names, prep_report=report)


def prepare_table(
    table: RawTable,
    onehot_max_cardinality: int = 10,
    drop_threshold: float = 0.5,
) -> PreparedDataset:
    """Run the full encode, impute, standardize pipeline."""
    encoded = encode_categoricals(table, onehot_max_cardinality)
    imputed = impute_missing(encoded, drop_threshold)
    return standardize(imputed)


def generate_synthetic(
    n: int, p: int, noise_std: float, seed: int
) -> PreparedDataset:
    """Build a synthetic dataset with correlated indicator features.

    Columns share a single latent factor with positive loadings, the usual
    structure of composite-index data where many observed indicators move
    together with one underlying quantity. The target is a positive-weight
    linear combination of the standardized features plus Gaussian noise.
    Deterministic for a fixed seed.
    """
    if n < 10:
        raise ValueError("n must be at least 10")
    if p < 2:
        raise ValueError("p must be at least 2")
    if noise_std < 0.0:
        raise ValueError("noise_std must be nonnegative")

    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.1, 1.0, size=p)
    weights /= np.linalg.norm(weights)
    loadings = rng.uniform(0.3, 0.9, size=p)
    factor = rng.standard_normal(n)
    idiosyncratic = rng.standard_normal((n, p))
    X = factor[:, None] * loadings[None, :] + idiosyncratic * np.sqrt(
        1.0 - loadings**2
    )
    X = X - X.mean(axis=0)
    X = X / X.std(axis=0)
    y = X @ weights + rng.normal(0.0, noise_std, size=n)

    report = PrepReport()
    report.notes.append(
        f"synthetic dataset: n={n} p={p} noise_std={noise_std} seed={seed}"
    )
    names = [f"x{j}" for j in range(p)]
    return PreparedDataset(X=X, y=y, feature_names=names, prep_report=report)


TARGET_HEADER = "__target"


def write_prepared_csv(dataset: PreparedDataset, path: str) -> None:
    """Serialize a prepared dataset; final column is the target."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + [TARGET_HEADER])
        for i in range(dataset.n):
            row = [repr(float(v)) for v in dataset.X[i]]
            row.append(repr(float(dataset.y[i])))
            writer.writerow(row)


def read_prepared_csv(path: str) -> PreparedDataset:
    """Load a CSV written by :func:`write_prepared_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty input file") from None
        if header[-1] != TARGET_HEADER:
            raise ValueError(f"prepared CSV must end with a {TARGET_HEADER!r} column")
        rows = [[float(cell) for cell in row] for row in reader if row]
    if not rows:
        raise ValueError("prepared CSV has no data rows")
    data = np.asarray(rows, dtype=float)
    report = PrepReport()
    report.notes.append(f"loaded prepared CSV {path}")
    return PreparedDataset(
        X=data[:, :-1], y=data[:, -1], feature_names=header[:-1], prep_report=report
    )


def ensure_standardized(dataset: PreparedDataset) -> PreparedDataset:
    """Re-standardize a loaded dataset when its columns drifted.

    Standardization is idempotent within float tolerance, so applying it to
    already clean data is a no-op; hand-made CSVs get fixed up instead of
    causing downstream precondition failures.
    """
    means = dataset.X.mean(axis=0)
    variances = dataset.X.var(axis=0)
    if np.all(np.abs(means) <= 1e-9) and np.all(np.abs(variances - 1.0) <= 1e-6):
        return dataset
    keep = dataset.X.std(axis=0) >= ZERO_VARIANCE_EPS
    if not np.any(keep):
        raise ValueError("no usable features")
    X = dataset.X[:, keep]
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    report = dataset.prep_report.copy()
    for name, dropped in zip(dataset.feature_names, ~keep):
        if dropped:
            report.dropped_columns.append((name, "zero variance"))
    report.notes.append("re-standardized loaded features")
    names = [n for n, k in zip(dataset.feature_names, keep) if k]
    return PreparedDataset(X=X, y=dataset.y, feature_names=names, prep_report=report)


def target_summary(y: np.ndarray) -> str:
    """One-line summary used in prep reports."""
    y = np.asarray(y, dtype=float)
    return (
        f"target: n={len(y)} min={y.min():.6g} max={y.max():.6g} "
        f"mean={y.mean():.6g} std={y.std():.6g}"
    )
