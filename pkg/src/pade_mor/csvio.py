"""CSV output with '#'-prefixed metadata lines and full-precision numbers."""

from __future__ import annotations

import csv
import math

SCHEMA_VERSION = 1

SCHEMAS = {
    "sweep": ["z", "M", "N", "E", "rho", "norm_truth", "norm_pade", "rel_error", "flag"],
    "error_vs_M": [
        "z", "M", "N", "E", "rho", "error", "taylor_error", "heuristic_rate",
        "lambda_min", "gap", "gram_norm", "degenerate",
    ],
    "roots": [
        "M", "N", "root_index", "root_re", "root_im", "pole_index", "pole", "distance",
        "lambda_min", "gap", "gram_norm", "degenerate",
    ],
    "samples": ["k2", "X", "M", "N", "X_P"],
    "chf": ["M", "N", "t", "re_phi_x", "im_phi_x", "re_phi_xp", "im_phi_xp", "err_t"],
    "rates": [
        "M", "N", "max_err", "fitted_slope", "slope_stderr", "theoretical_slope",
        "noise_floor", "unresolved", "consistent", "excluded_truth", "excluded_surrogate",
    ],
}


def fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def write(path, schema, rows, meta):
    """Write ``rows`` (sequences matching the schema) after the metadata block."""
    columns = SCHEMAS[schema]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: pade-mor/{schema}/v{SCHEMA_VERSION}\n")
        for k in sorted(meta):
            fh.write(f"# {k}: {meta[k]}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            if len(r) != len(columns):
                raise ValueError(f"{schema}: row has {len(r)} fields, expected {len(columns)}")
            w.writerow([fmt(v) for v in r])


def read(path):
    """Return ``(meta, columns, rows)`` with rows as lists of strings."""
    meta, lines = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition(": ")
                meta[k] = v
            else:
                lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    return meta, columns, list(reader)
