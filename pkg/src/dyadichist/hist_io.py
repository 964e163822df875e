"""File formats: histogram JSON (format_version 1) and points CSV.

Histogram JSON is an object with fields `d`, `K`, `n`, `counts` (row-major
array), `prior` (array, or a scalar meaning one uniform per-cell value) and
`format_version`.  Points CSV holds one point per line as d comma-separated
decimals in [0, 1].
"""

from __future__ import annotations

import json

import numpy as np

from .core import DENSE_CELL_LIMIT, DyadicHistogram
from .errors import CapacityError, DataFormatError

FORMAT_VERSION = 1


def histogram_to_json(hist: DyadicHistogram) -> dict:
    """JSON-serializable dict for a histogram (dense storage only)."""
    if hist.is_sparse:
        raise CapacityError("sparse histograms exceed the JSON dense-array format")
    counts = hist.dense_counts()
    prior = hist.dense_prior()
    prior_field: object
    if prior.size and np.all(prior == prior[0]):
        prior_field = float(prior[0])
    else:
        prior_field = [float(x) for x in prior]
    return {
        "format_version": FORMAT_VERSION,
        "d": hist.d,
        "K": hist.K,
        "n": hist.n,
        "counts": [int(c) for c in counts],
        "prior": prior_field,
    }


def histogram_from_json(obj) -> DyadicHistogram:
    """Parse and validate a histogram JSON object."""
    if not isinstance(obj, dict):
        raise DataFormatError("histogram JSON must be an object")
    for key in ("format_version", "d", "K", "n", "counts", "prior"):
        if key not in obj:
            raise DataFormatError(f"histogram JSON is missing field {key!r}")
    if obj["format_version"] != FORMAT_VERSION:
        raise DataFormatError(f"unsupported format_version {obj['format_version']!r}")
    d, K, n = obj["d"], obj["K"], obj["n"]
    if not (isinstance(d, int) and d >= 1 and isinstance(K, int) and K >= 0):
        raise DataFormatError("fields d and K must be integers with d >= 1, K >= 0")
    cells = (2**K) ** d
    if cells > DENSE_CELL_LIMIT:
        raise CapacityError(f"histogram JSON with {cells} cells exceeds the dense limit")
    counts = np.asarray(obj["counts"], dtype=np.int64)
    if counts.shape != (cells,):
        raise DataFormatError(f"counts must have length {cells}, got {counts.size}")
    if counts.min(initial=0) < 0:
        raise DataFormatError("counts must be nonnegative")
    if int(counts.sum()) != n:
        raise DataFormatError("counts do not sum to n")
    prior = obj["prior"]
    if np.isscalar(prior):
        prior_arr = np.full(cells, float(prior))
    else:
        prior_arr = np.asarray(prior, dtype=float)
    if prior_arr.shape != (cells,) or np.any(prior_arr < 0):
        raise DataFormatError("prior must be a nonnegative scalar or array of cell length")
    return DyadicHistogram(d, K, int(n), counts, prior_arr)


def save_histogram(hist: DyadicHistogram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(histogram_to_json(hist), fh)
        fh.write("\n")


def load_histogram(path) -> DyadicHistogram:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid JSON: {exc}") from exc
    return histogram_from_json(obj)


def parse_point_line(line: str, lineno: int, d: int | None = None) -> list[float]:
    """One CSV row -> point coordinates; validates arity and range."""
    parts = line.split(",")
    try:
        coords = [float(part) for part in parts]
    except ValueError:
        raise DataFormatError(f"cannot parse decimals in {line.strip()!r}", line=lineno) from None
    if d is not None and len(coords) != d:
        raise DataFormatError(f"expected {d} coordinates, got {len(coords)}", line=lineno)
    for c in coords:
        if not np.isfinite(c) or c < 0.0 or c > 1.0:
            raise DataFormatError(f"coordinate {c!r} outside [0, 1]", line=lineno)
    return coords


def read_points_csv(path, d: int | None = None) -> np.ndarray:
    """Read a points file into an (n, d) array; blank lines are skipped.

    Malformed rows raise DataFormatError carrying the 1-based line number.
    """
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            coords = parse_point_line(line, lineno, d)
            if rows and len(coords) != len(rows[0]):
                raise DataFormatError("inconsistent coordinate count", line=lineno)
            rows.append(coords)
    if not rows:
        return np.zeros((0, d if d is not None else 1))
    return np.asarray(rows, dtype=float)
