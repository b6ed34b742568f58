"""Integer-indexed sample windows.

Simulated processes live on an integer time axis t (not array positions),
and estimation windows are specified in t.  Series pairs a value array with
its starting index so window extraction can be checked against the actual
available range.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import WindowOutOfRange


@dataclass(frozen=True)
class Series:
    """A contiguous block of samples x_t for t = t_start .. t_start + n - 1."""

    values: np.ndarray
    t_start: int

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.ascontiguousarray(self.values, dtype=float)
        )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def t_end(self) -> int:
        """Index of the last sample (inclusive)."""
        return self.t_start + len(self.values) - 1

    def window(self, t_lo: int, t_hi: int) -> np.ndarray:
        """Samples x_t for t = t_lo .. t_hi inclusive.

        Raises
        ------
        WindowOutOfRange
            If any requested index falls outside the series.
        """
        if t_lo > t_hi:
            raise WindowOutOfRange(f"empty window [{t_lo}, {t_hi}]")
        if t_lo < self.t_start or t_hi > self.t_end:
            raise WindowOutOfRange(
                f"window [{t_lo}, {t_hi}] outside samples "
                f"[{self.t_start}, {self.t_end}]"
            )
        offset = t_lo - self.t_start
        return self.values[offset : offset + (t_hi - t_lo + 1)]

    def value_at(self, t: int) -> float:
        return float(self.window(t, t)[0])


def write_series_csv(series: Series, path) -> None:
    """Write columns t, x with full float precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x"])
        for i, v in enumerate(series.values):
            writer.writerow([series.t_start + i, repr(float(v))])


def read_series_csv(path) -> Series:
    """Read a t, x file written by :func:`write_series_csv`.

    The t column must be contiguous and increasing.
    """
    ts: list[int] = []
    xs: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            ts.append(int(row["t"]))
            xs.append(float(row["x"]))
    if not ts:
        raise ValueError(f"no samples in {path}")
    t = np.asarray(ts)
    if np.any(np.diff(t) != 1):
        raise ValueError(f"t column in {path} is not contiguous")
    return Series(np.asarray(xs), t_start=ts[0])
