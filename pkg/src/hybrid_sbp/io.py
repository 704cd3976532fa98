"""CSV, Matrix Market and sparsity-pattern output."""

from __future__ import annotations

import csv
import io as _io
import math
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

__all__ = ["format_value", "write_csv", "csv_text", "write_matrix_market", "write_sparsity"]


def format_value(v) -> str:
    """Deterministic text for a CSV cell: shortest round-trip repr for floats."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def csv_text(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(r.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, rows: list[dict], columns: list[str] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(rows, columns))
    return path


def write_matrix_market(path, A, comment: str = "") -> Path:
    """Coordinate-format Matrix Market file (general, real, 1-based)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    A = sp.coo_matrix(A) if not isinstance(A, np.ndarray) or A.ndim == 2 else sp.coo_matrix(np.asarray(A)[:, None])
    scipy.io.mmwrite(str(path), A, comment=comment, field="real", precision=17, symmetry="general")
    return path


def write_sparsity(path, A) -> Path:
    """0-based ``row,col`` pairs of the structural nonzeros, sorted."""
    A = sp.coo_matrix(A)
    A.sum_duplicates()
    keep = A.data != 0
    r, c = A.row[keep], A.col[keep]
    order = np.lexsort((c, r))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write(f"# shape {A.shape[0]} {A.shape[1]}\nrow,col\n")
        np.savetxt(fh, np.column_stack([r[order], c[order]]), fmt="%d", delimiter=",")
    return path
