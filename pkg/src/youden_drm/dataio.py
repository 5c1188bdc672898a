"""CSV input and output for two-group biomarker data.

Format: a header row with columns ``group`` (0 = healthy, 1 = diseased) and
``value``, plus an optional ``biomarker`` column naming the marker when one
file holds several.  Column order is free; extra columns are ignored.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Mapping

import numpy as np

from .drm import BiomarkerSample
from .errors import DataError, EmptyGroup, ParseError

__all__ = ["DEFAULT_MARKER", "parse_dataset", "write_dataset"]

# key used when the file has no biomarker column
DEFAULT_MARKER = "value"


def _parse_value(text: str, path: str, line: int, llod: float) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"value {text!r} is not a number", path, line) from None
    if math.isnan(v) or v == math.inf:
        raise ParseError(f"value {text!r} is not a finite number", path, line)
    if v == -math.inf and llod == -math.inf:
        raise ParseError("a -inf value marks a below-LLOD unit and needs --llod", path, line)
    return v


def parse_dataset(path: str | Path, llod: float = -math.inf) -> dict[str, BiomarkerSample]:
    """Read a CSV file into one sample per biomarker, in order of first appearance.

    Values strictly below ``llod`` become below-LLOD counts; a value of
    ``-inf`` marks a unit known only to be below the limit.
    """
    path = Path(path)
    spath = str(path)
    llod = float(llod)
    if math.isnan(llod) or llod == math.inf:
        raise DataError(f"llod must be a finite number or -inf, got {llod}")
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"{spath}: cannot open input file: {exc.strerror or exc}") from None
    groups: dict[str, tuple[list[float], list[float]]] = defaultdict(lambda: ([], []))
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", spath, 1) from None
        except csv.Error as exc:
            raise ParseError(str(exc), spath, 1) from None
        cols = [h.strip().lower() for h in header]
        for need in ("group", "value"):
            if need not in cols:
                raise ParseError(f"header lacks a {need!r} column", spath, 1)
        ig, iv = cols.index("group"), cols.index("value")
        ib = cols.index("biomarker") if "biomarker" in cols else None
        try:
            for row in reader:
                line = reader.line_num
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(cols):
                    raise ParseError(f"expected {len(cols)} fields, found {len(row)}", spath, line)
                g = row[ig].strip()
                if g not in ("0", "1"):
                    raise ParseError(f"group must be 0 or 1, got {row[ig]!r}", spath, line)
                v = _parse_value(row[iv].strip(), spath, line, llod)
                marker = row[ib].strip() if ib is not None else DEFAULT_MARKER
                if not marker:
                    raise ParseError("empty biomarker name", spath, line)
                groups[marker][int(g)].append(v)
        except csv.Error as exc:
            raise ParseError(str(exc), spath, reader.line_num) from None
    if not groups:
        raise EmptyGroup(f"{spath}: no data rows")
    out: dict[str, BiomarkerSample] = {}
    for marker, (h, d) in groups.items():
        for label, vals in (("healthy (group 0)", h), ("diseased (group 1)", d)):
            if not vals:
                raise EmptyGroup(f"{spath}: biomarker {marker!r} has no {label} rows")
        out[marker] = BiomarkerSample.from_values(np.array(h), np.array(d), llod)
    return out


def write_dataset(path: str | Path, samples: Mapping[str, BiomarkerSample] | BiomarkerSample) -> None:
    """Write samples in the format :func:`parse_dataset` reads.

    Detected values are written with ``repr`` so they read back exactly.
    Below-LLOD units are written as ``-inf``; read the file back with the
    same ``llod`` to recover the counts.
    """
    if isinstance(samples, BiomarkerSample):
        samples = {DEFAULT_MARKER: samples}
    multi = len(samples) > 1 or next(iter(samples)) != DEFAULT_MARKER
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("group", "value", "biomarker") if multi else ("group", "value"))
        for marker, s in samples.items():
            for g, det, below in ((0, s.healthy_detected, s.healthy_below), (1, s.diseased_detected, s.diseased_below)):
                vals = ["-inf"] * below + [repr(float(v)) for v in det]
                for v in vals:
                    w.writerow((g, v, marker) if multi else (g, v))
