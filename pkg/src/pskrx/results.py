"""Tabular result rows and their CSV encoding."""
import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional

CSV_HEADER = ("m", "alpha", "mean_photons", "n_modes", "method", "success", "error_rate", "std_dev")


def fmt(value: float) -> str:
    return f"{value:.12g}"


@dataclass(frozen=True)
class SweepResult:
    m: int
    alpha: float
    n_modes: Optional[int]
    method: str
    success: float
    std_dev: Optional[float] = None

    @property
    def mean_photons(self) -> float:
        return self.alpha * self.alpha

    @property
    def error_rate(self) -> float:
        return 1.0 - self.success

    def csv_fields(self):
        return (
            str(self.m),
            fmt(self.alpha),
            fmt(self.mean_photons),
            "" if self.n_modes is None else str(self.n_modes),
            self.method,
            fmt(self.success),
            fmt(self.error_rate),
            "" if self.std_dev is None else fmt(self.std_dev),
        )


def write_csv(rows: Iterable[SweepResult], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())


def to_csv(rows: Iterable[SweepResult]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
