"""CSV / structured report writers.

Reports are byte-reproducible: no timestamps, floats through repr, and every
summary embeds the kernel-normalization tag and the tool version.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

from . import __version__, NORMALIZATION_TAG


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        value = float(value)  # numpy scalars repr as np.float64(...)
        if math.isnan(value):
            return ""
        return repr(value)
    return value


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return path


def canonical_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def gram_rows(gram):
    entries = gram.entries
    n = entries.shape[0]
    for i in range(n):
        for j in range(n):
            yield (i + 1, j + 1, float(entries[i, j].real),
                   float(entries[i, j].imag))


GRAM_HEADER = ("n", "p", "re", "im")
TAILS_HEADER = ("N", "c_N", "C_N", "eps_row", "max_rowL2")
STABILITY_HEADER = ("n", "pseudo_hyp", "norm_ratio", "eps_segment",
                    "cor36", "thm310_eq1", "thm310_eq2", "cor312")
PROP41_HEADER = ("N", "eps_row", "c_N", "C_N", "bound_C_over_lambdaN")
PROJECTION_HEADER = ("n", "R", "absR1", "theta2_sq", "term54", "partial_sum")
PROJECTION_TAILS_HEADER = ("N", "c_N_b1", "C_N_b1", "c_N_b2", "C_N_b2")


def gram_sidecar(gram) -> dict:
    meta = dict(gram.metadata)
    meta["normalization"] = NORMALIZATION_TAG
    if "symbol" in meta:
        meta["symbol_hash"] = canonical_hash(meta["symbol"])
    return meta


def stability_rows(report):
    for row in report.rows:
        yield (row["n"], row["pseudo_hyp"], row["norm_ratio"],
               row["eps_segment"], row["cor36"], row["thm310_eq1"],
               row["thm310_eq2"], row["cor312"])


def eps_tail_rows(report):
    for N, eps in report.eps_tail:
        yield (N, eps)


def run_summary(seed: int, fmt: str, analyses: list, config_hash: str) -> dict:
    return {
        "tool": "aobkit",
        "version": __version__,
        "normalization": NORMALIZATION_TAG,
        "seed": seed,
        "format": fmt,
        "config_sha256": config_hash,
        "analyses": analyses,
    }
