"""Longitudinal semicontinuous panel data: CSV ingestion and indexing.

A dataset is a flat, row-ordered collection of observations, each tied
to a subject (the correlated unit), with a non-negative outcome and a
fixed-width covariate row. Ingestion is strict: rows with missing
fields are dropped, anything else that fails to parse is an error.
"""

from dataclasses import dataclass, field
import csv
import datetime

import numpy as np

from .errors import DomainError, ParseError, SchemaError, UnsupportedDesignError

_NA_TOKENS = {"", "NA"}
_DATE_FORMATS = ("%Y-%m-%d", "%Y/%m/%d", "%Y.%m.%d")


@dataclass(frozen=True)
class Observation:
    """One subject-time record: outcome y >= 0 and a covariate row."""

    subject_id: str
    time: float | None
    outcome: float
    covariates: np.ndarray


@dataclass
class PanelDataset:
    """Validated, immutable unbalanced panel.

    Rows keep their input order. ``subject_index`` maps each subject id
    to a contiguous integer 1..n by order of first appearance.
    """

    subject_ids: tuple
    y: np.ndarray
    X: np.ndarray
    time: np.ndarray | None
    covariate_names: tuple
    subject_index: dict = field(repr=False)

    @property
    def n(self):
        return len(self.subject_index)

    @property
    def N(self):
        return len(self.y)

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def observations(self):
        return [
            Observation(
                subject_id=self.subject_ids[i],
                time=None if self.time is None else float(self.time[i]),
                outcome=float(self.y[i]),
                covariates=self.X[i],
            )
            for i in range(self.N)
        ]

    def subject_codes(self):
        """Per-row subject integers 1..n as an int32 array."""
        return np.fromiter(
            (self.subject_index[s] for s in self.subject_ids), dtype=np.int32, count=self.N
        )

    @classmethod
    def from_arrays(cls, subject_ids, y, X, time=None, covariate_names=None):
        """Build and validate a dataset from parallel arrays."""
        y = np.ascontiguousarray(y, dtype=np.float64)
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise SchemaError("covariates must form a 2-D array")
        N = len(y)
        if len(subject_ids) != N or X.shape[0] != N:
            raise SchemaError("subject ids, outcomes and covariate rows must have equal length")
        if time is not None:
            time = np.ascontiguousarray(time, dtype=np.float64)
            if len(time) != N:
                raise SchemaError("time column length mismatch")
        p = X.shape[1]
        if p < 2:
            raise UnsupportedDesignError(
                f"the rank test is only defined for p >= 2 covariates (got p={p})"
            )
        if covariate_names is None:
            covariate_names = tuple(f"x{k + 1}" for k in range(p))
        covariate_names = tuple(str(c) for c in covariate_names)
        if len(covariate_names) != p:
            raise SchemaError("covariate_names length must equal the covariate count")
        if not np.isfinite(y).all():
            raise DomainError("outcomes contain non-finite values")
        if not np.isfinite(X).all():
            raise DomainError("covariates contain non-finite values")
        if N > 0 and (y < 0).any():
            i = int(np.argmax(y < 0))
            raise DomainError(f"outcome must be non-negative (row {i + 1} has y={y[i]!r})")
        if N > 0:
            for k in range(p):
                if (X[:, k] == 1.0).all():
                    raise UnsupportedDesignError(
                        f"covariate {covariate_names[k]!r} is an all-ones column; "
                        "ranks are shift-invariant, drop the intercept"
                    )
        index = {}
        for s in subject_ids:
            s = str(s)
            if s not in index:
                index[s] = len(index) + 1
        for arr in (y, X) + (() if time is None else (time,)):
            arr.flags.writeable = False
        return cls(
            subject_ids=tuple(str(s) for s in subject_ids),
            y=y,
            X=X,
            time=time,
            covariate_names=covariate_names,
            subject_index=index,
        )

    def subset(self, subject_ids):
        """Rows of the given subjects, in the original row order."""
        keep = set(subject_ids)
        missing = keep - set(self.subject_index)
        if missing:
            raise DomainError(f"unknown subject ids: {sorted(missing)[:5]}")
        rows = [i for i, s in enumerate(self.subject_ids) if s in keep]
        return PanelDataset.from_arrays(
            [self.subject_ids[i] for i in rows],
            self.y[rows],
            self.X[rows],
            time=None if self.time is None else self.time[rows],
            covariate_names=self.covariate_names,
        )


def _parse_time(text):
    try:
        return float(text)
    except ValueError:
        pass
    for fmt in _DATE_FORMATS:
        try:
            return float(datetime.datetime.strptime(text, fmt).date().toordinal())
        except ValueError:
            continue
    raise ValueError(text)


def load_csv(path, outcome_col, id_col, covariate_cols, time_col=None):
    """Load a long-format CSV (header row, one row per observation).

    Rows with an empty or ``NA`` cell in any selected column are
    dropped. Any other unparseable cell is an error carrying the CSV
    line number. The time column may hold numbers or calendar dates
    (YYYY-MM-DD, YYYY/MM/DD, or YYYY.MM.DD), which are converted to day
    ordinals.
    """
    covariate_cols = list(covariate_cols)
    if len(covariate_cols) < 2:
        raise UnsupportedDesignError(
            "the rank test is only defined for p >= 2 covariates; "
            f"got {len(covariate_cols)} covariate column(s)"
        )
    if len(set(covariate_cols)) != len(covariate_cols):
        raise SchemaError("duplicate covariate column names")

    ids, ys, rows, times = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a header row")
        needed = [id_col, outcome_col] + covariate_cols + ([time_col] if time_col else [])
        missing = [c for c in needed if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")

        for lineno, row in enumerate(reader, start=2):
            cells = [row.get(c) for c in needed]
            if any(c is None or c.strip() in _NA_TOKENS for c in cells):
                continue  # reject the row, never impute
            try:
                yval = float(row[outcome_col])
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: column {outcome_col!r}: "
                    f"cannot parse {row[outcome_col]!r}"
                ) from None
            if yval < 0:
                raise DomainError(
                    f"{path}:{lineno}: outcome must be non-negative, got {yval!r}"
                )
            xrow = []
            for c in covariate_cols:
                try:
                    xrow.append(float(row[c]))
                except ValueError:
                    raise ParseError(
                        f"{path}:{lineno}: column {c!r}: cannot parse {row[c]!r}"
                    ) from None
            if time_col:
                try:
                    times.append(_parse_time(row[time_col].strip()))
                except ValueError:
                    raise ParseError(
                        f"{path}:{lineno}: column {time_col!r}: "
                        f"cannot parse {row[time_col]!r} as number or date"
                    ) from None
            ids.append(row[id_col])
            ys.append(yval)
            rows.append(xrow)

    X = np.array(rows, dtype=np.float64).reshape(len(ys), len(covariate_cols))
    return PanelDataset.from_arrays(
        ids,
        np.array(ys),
        X,
        time=np.array(times) if time_col else None,
        covariate_names=covariate_cols,
    )


def write_csv(dataset, path_or_file):
    """Write a dataset in the standard long format (lossless floats)."""
    has_time = dataset.time is not None

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        header = ["id"] + (["t"] if has_time else []) + ["y"] + list(dataset.covariate_names)
        writer.writerow(header)
        for i in range(dataset.N):
            row = [dataset.subject_ids[i]]
            if has_time:
                row.append(format(dataset.time[i], ".17g"))
            row.append(format(dataset.y[i], ".17g"))
            row.extend(format(v, ".17g") for v in dataset.X[i])
            writer.writerow(row)

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            _write(fh)


_RAINY_MONTHS = (10, 11, 12, 1, 2, 3)


def load_rainfall_csv(path, id_col, time_col, outcome_col, city_one):
    """Load two-city daily rainfall and build the (city, season) design.

    The covariates are x1 = 1 for rows of ``city_one`` (0 otherwise) and
    x2 = 1 for dates in the rainy season (October through March). The
    subject id stays the city; pipe the result through
    ``group_city_weeks`` to make each week the correlated unit.
    """
    ids, ys, times = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a header row")
        needed = [id_col, time_col, outcome_col]
        missing = [c for c in needed if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")
        for lineno, row in enumerate(reader, start=2):
            cells = [row.get(c) for c in needed]
            if any(c is None or c.strip() in _NA_TOKENS for c in cells):
                continue
            try:
                day = _parse_time(row[time_col].strip())
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: column {time_col!r}: "
                    f"cannot parse {row[time_col]!r} as number or date"
                ) from None
            try:
                yval = float(row[outcome_col])
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: column {outcome_col!r}: "
                    f"cannot parse {row[outcome_col]!r}"
                ) from None
            if yval < 0:
                raise DomainError(
                    f"{path}:{lineno}: outcome must be non-negative, got {yval!r}"
                )
            ids.append(row[id_col])
            ys.append(yval)
            times.append(day)

    cities = sorted({str(s) for s in ids})
    if str(city_one) not in cities:
        raise DomainError(f"--city-one {city_one!r} not found among ids {cities[:5]}")
    x1 = np.array([1.0 if str(s) == str(city_one) else 0.0 for s in ids])
    x2 = np.array(
        [
            1.0 if datetime.date.fromordinal(int(t)).month in _RAINY_MONTHS else 0.0
            for t in times
        ]
    )
    return PanelDataset.from_arrays(
        ids,
        np.array(ys),
        np.column_stack([x1, x2]) if ids else np.empty((0, 2)),
        time=np.array(times),
        covariate_names=("city", "season"),
    )


def group_city_weeks(dataset, week_len=7):
    """Re-key subjects to (unit, week) pairs using the time column.

    Days are bucketed into consecutive ``week_len``-day windows counted
    from the earliest day in the dataset; incomplete weeks are kept.
    """
    if week_len < 1:
        raise DomainError(f"week_len must be >= 1, got {week_len}")
    if dataset.N == 0:
        return dataset
    if dataset.time is None:
        raise SchemaError("week grouping needs a time column with day numbers or dates")
    origin = float(np.floor(dataset.time.min()))
    weeks = ((dataset.time - origin) // week_len).astype(np.int64)
    new_ids = [f"{sid}:{wk}" for sid, wk in zip(dataset.subject_ids, weeks)]
    return PanelDataset.from_arrays(
        new_ids,
        dataset.y,
        dataset.X,
        time=dataset.time,
        covariate_names=dataset.covariate_names,
    )
