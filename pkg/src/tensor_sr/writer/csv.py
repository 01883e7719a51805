"""
Write a table of results to a CSV file
"""

import csv

from typing import Iterable, Sequence

from pii_data.helper.io import openfile

from ..helper.exception import ConfigError


def write_csv(rows: Iterable[Sequence], outname: str, header: Sequence[str] = None):
    """
    Write table rows as a CSV file, optionally preceded by a header row
    """
    if not str(outname).lower().endswith(".csv"):
        raise ConfigError("cannot write '{}' as CSV: wrong extension", outname)

    with openfile(str(outname), "w", encoding="utf-8") as f:
        w = csv.writer(f)
        if header:
            w.writerow(header)
        for row in rows:
            w.writerow(row)
