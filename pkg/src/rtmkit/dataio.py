"""CSV ingestion and rendering of paired samples.

The input contract is deliberately narrow: UTF-8 text, a header row that
contains the columns ``x1`` and ``x2`` (exact names; additional columns are
ignored with a warning), one numeric pair per row, decimal-point floats.
Anything else — missing header, ragged rows, non-numeric or non-finite
cells, fewer than two rows — raises :class:`~rtmkit.errors.DataError` naming
the offending location.

Rendering uses ``repr``-style shortest round-trip floats, so a sample
written with :func:`sample_to_csv` and read back parses to bit-identical
values.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Optional

from .errors import DataError
from .sampling import LatentSample, ObservedSample

__all__ = ["read_sample_csv", "sample_to_csv"]


def read_sample_csv(text: str) -> tuple[ObservedSample, list[str]]:
    """Parse paired-sample CSV text into an :class:`ObservedSample`.

    Returns the sample and a list of ingestion warnings (currently only:
    extra columns that were ignored).

    Raises
    ------
    DataError
        On a missing/invalid header, ragged rows, non-numeric or non-finite
        cells, or fewer than two data rows.
    """
    reader = csv.reader(io.StringIO(text.lstrip("﻿")))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty input: expected a header row with columns x1,x2") from None
    header = [cell.strip() for cell in header]
    try:
        i1 = header.index("x1")
        i2 = header.index("x2")
    except ValueError:
        raise DataError(
            f"header must contain columns 'x1' and 'x2', got {header!r}"
        ) from None

    warnings: list[str] = []
    extras = [name for k, name in enumerate(header) if k not in (i1, i2)]
    if extras:
        warnings.append("ignoring extra CSV columns: " + ", ".join(extras))

    x1: list[float] = []
    x2: list[float] = []
    for row_number, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and row[0].strip() == ""):
            continue  # blank line
        if len(row) != len(header):
            raise DataError(
                f"row {row_number} has {len(row)} cells, expected {len(header)}"
            )
        pair = []
        for index, column in ((i1, "x1"), (i2, "x2")):
            cell = row[index].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"row {row_number}, column {column}: {cell!r} is not a number"
                ) from None
            if not math.isfinite(value):
                raise DataError(
                    f"row {row_number}, column {column}: non-finite value {cell!r}"
                )
            pair.append(value)
        x1.append(pair[0])
        x2.append(pair[1])

    if len(x1) < 2:
        raise DataError(f"a sample needs at least 2 observations, got {len(x1)}")
    return ObservedSample(x1=x1, x2=x2), warnings


def sample_to_csv(obs: ObservedSample, latent: Optional[LatentSample] = None) -> str:
    """Render a sample as CSV with shortest round-trip float formatting.

    Header is ``x1,x2``, or ``X1,X2,x1,x2`` when the latent sample is
    included (readable back by :func:`read_sample_csv`, which will ignore
    the latent columns with a warning).
    """
    lines = []
    if latent is None:
        lines.append("x1,x2")
        for a, b in zip(obs.x1, obs.x2):
            lines.append(f"{float(a)!r},{float(b)!r}")
    else:
        if latent.n != obs.n:
            raise DataError(
                f"latent and observed samples differ in length: {latent.n} vs {obs.n}"
            )
        lines.append("X1,X2,x1,x2")
        for A, B, a, b in zip(latent.X1, latent.X2, obs.x1, obs.x2):
            lines.append(f"{float(A)!r},{float(B)!r},{float(a)!r},{float(b)!r}")
    return "\n".join(lines) + "\n"
