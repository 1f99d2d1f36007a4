"""Time-series panel container with CSV round trips."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataInputError, ModelStructureError

__all__ = ["TimeSeriesPanel"]


def _labels_increasing(times) -> bool:
    arr = list(times)
    try:
        vals = [float(t) for t in arr]
    except (TypeError, ValueError):
        vals = [str(t) for t in arr]
    return all(a < b for a, b in zip(vals, vals[1:]))


@dataclass
class TimeSeriesPanel:
    """T x N real observations with an ordered time index.

    Attributes
    ----------
    values : ndarray, shape (T, N)
    times : list
        Strictly increasing labels (numbers, or strings that sort in time
        order such as ISO dates).
    names : list of str
        One label per series.
    """

    values: np.ndarray
    times: list = field(default=None)
    names: list = field(default=None)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2:
            raise ModelStructureError(f"values must be 2-D, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DataInputError("panel contains missing or non-finite values")
        self.values = vals
        t, n = vals.shape
        if self.times is None:
            self.times = list(range(t))
        else:
            self.times = list(self.times)
        if len(self.times) != t:
            raise ModelStructureError(f"{len(self.times)} time labels for {t} rows")
        if not _labels_increasing(self.times):
            raise ModelStructureError("time labels must be strictly increasing")
        if self.names is None:
            self.names = [f"y{i + 1}" for i in range(n)]
        else:
            self.names = [str(x) for x in self.names]
        if len(self.names) != n:
            raise ModelStructureError(f"{len(self.names)} names for {n} series")

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_series(self) -> int:
        return self.values.shape[1]

    def series(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def with_values(self, values: np.ndarray) -> "TimeSeriesPanel":
        """Same index and names, new observations of matching shape."""
        return TimeSeriesPanel(values=values, times=list(self.times), names=list(self.names))

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.values, columns=self.names)
        df.insert(0, "t", self.times)
        return df

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, lineterminator="\n")

    @classmethod
    def read_csv(cls, path) -> "TimeSeriesPanel":
        """Read a panel whose first column holds time labels.

        Reports the 1-based file row (header included) of the first missing or
        non-numeric cell.
        """
        try:
            df = pd.read_csv(path, dtype=str, keep_default_na=False)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
            raise DataInputError(f"cannot read CSV {path}: {exc}") from exc
        if df.shape[1] < 2:
            raise DataInputError("CSV must have a time column plus at least one series")
        times = df.iloc[:, 0].tolist()
        names = list(df.columns[1:])
        numeric = df.iloc[:, 1:].apply(lambda col: pd.to_numeric(col, errors="coerce"))
        bad = numeric.isna()
        if bad.to_numpy().any():
            row = int(bad.any(axis=1).idxmax())
            col = bad.columns[bad.iloc[row].to_numpy().argmax()]
            raise DataInputError(
                f"missing or non-numeric value at file row {row + 2}, column '{col}'"
            )
        return cls(values=numeric.to_numpy(dtype=float), times=times, names=names)
