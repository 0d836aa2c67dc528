"""CSV and JSON serialization with reproducible bytes.

All numeric output uses 17 significant digits, which round-trips any
double exactly, and files are written with "\n" line endings on every
platform. JSON is emitted by a small deterministic writer (fixed key
order, fixed float format) so serialize -> parse -> serialize is
byte-identical.

CSV formats:
    x.csv / y.csv          headerless, comma separated, one row per individual
    labels.csv             kind,index,label  (kind is "row" or "col", 1-based)
    free_energy.csv        iteration,value   (one row per sub-step)
    bic_grid.csv           g,d,free_energy,bic,converged
    influence.csv          j,score,col_label,rank
    timing.csv             n,d,rep,seconds
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DimensionMismatch, NonBinaryValue, ParseError
from .model import BinaryMatrix, CovariateTable, HardLabels, ModelParams


def format_float(value) -> str:
    return "%.17g" % float(value)


def _read_rows(path, what: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {what} file {path}: {exc}") from exc
    rows = []
    width = None
    for lineno, line in enumerate(raw.split("\n"), start=1):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",")]
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(
                f"{what} line {lineno} has {len(fields)} fields, expected {width}",
                line=lineno,
            )
        rows.append((lineno, fields))
    if not rows:
        raise ParseError(f"{what} file {path} contains no data rows")
    return rows


def load_dataset(x_path, y_path):
    """Parse the binary matrix and covariate table, checking cell by cell.

    x must contain only 0/1 entries; y must be numeric and finite; the
    two files must agree on the number of rows. Errors carry the 1-based
    line and column of the first offending cell. Blank lines are
    ignored.
    """
    x_rows = _read_rows(x_path, "x")
    xv = np.empty((len(x_rows), len(x_rows[0][1])))
    for i, (lineno, fields) in enumerate(x_rows):
        for j, tok in enumerate(fields):
            try:
                val = float(tok)
            except ValueError as exc:
                raise NonBinaryValue(
                    f"x entry {tok!r} at line {lineno}, column {j + 1} is not a number",
                    line=lineno,
                    column=j + 1,
                ) from exc
            if val not in (0.0, 1.0):
                raise NonBinaryValue(
                    f"x entry {tok!r} at line {lineno}, column {j + 1} is not 0 or 1",
                    line=lineno,
                    column=j + 1,
                )
            xv[i, j] = val

    y_rows = _read_rows(y_path, "y")
    yv = np.empty((len(y_rows), len(y_rows[0][1])))
    for i, (lineno, fields) in enumerate(y_rows):
        for j, tok in enumerate(fields):
            try:
                val = float(tok)
            except ValueError as exc:
                raise ParseError(
                    f"y entry {tok!r} at line {lineno}, column {j + 1} is not a number",
                    line=lineno,
                    column=j + 1,
                ) from exc
            if not np.isfinite(val):
                raise ParseError(
                    f"y entry {tok!r} at line {lineno}, column {j + 1} is not finite",
                    line=lineno,
                    column=j + 1,
                )
            yv[i, j] = val

    if xv.shape[0] != yv.shape[0]:
        raise DimensionMismatch(
            f"x has {xv.shape[0]} rows but y has {yv.shape[0]}"
        )
    return BinaryMatrix(xv), CovariateTable(yv)


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_x_csv(path, x: BinaryMatrix) -> None:
    lines = [",".join(str(int(v)) for v in row) for row in x.values]
    _write_text(path, "\n".join(lines) + "\n")


def write_y_csv(path, y: CovariateTable) -> None:
    lines = [",".join(format_float(v) for v in row) for row in y.values]
    _write_text(path, "\n".join(lines) + "\n")


def write_labels_csv(path, labels: HardLabels) -> None:
    lines = ["kind,index,label"]
    lines += [f"row,{i + 1},{int(z)}" for i, z in enumerate(labels.row_labels)]
    lines += [f"col,{j + 1},{int(w)}" for j, w in enumerate(labels.col_labels)]
    _write_text(path, "\n".join(lines) + "\n")


def read_labels_csv(path) -> HardLabels:
    rows = _read_rows(path, "labels")
    header_line, header = rows[0]
    if [h.lower() for h in header] != ["kind", "index", "label"]:
        raise ParseError(f"labels header {header!r} unexpected", line=header_line)
    z, w = {}, {}
    for lineno, fields in rows[1:]:
        kind, idx_tok, lab_tok = fields
        try:
            idx, lab = int(idx_tok), int(lab_tok)
        except ValueError as exc:
            raise ParseError(f"labels line {lineno} is not integral", line=lineno) from exc
        if kind == "row":
            z[idx] = lab
        elif kind == "col":
            w[idx] = lab
        else:
            raise ParseError(f"labels kind {kind!r} at line {lineno}", line=lineno)
    if sorted(z) != list(range(1, len(z) + 1)) or sorted(w) != list(range(1, len(w) + 1)):
        raise ParseError("labels indices are not contiguous from 1")
    return HardLabels(
        [z[i] for i in range(1, len(z) + 1)],
        [w[j] for j in range(1, len(w) + 1)],
    )


def write_free_energy_csv(path, trace) -> None:
    lines = ["iteration,value"]
    lines += [f"{i},{format_float(v)}" for i, v in enumerate(np.asarray(trace, dtype=float))]
    _write_text(path, "\n".join(lines) + "\n")


def write_bic_grid_csv(path, grid) -> None:
    lines = ["g,d,free_energy,bic,converged"]
    for key in sorted(grid.entries):
        cell = grid.entries[key]
        conv = "true" if cell.fit.converged else "false"
        lines.append(
            f"{cell.g},{cell.d},{format_float(cell.free_energy)},{format_float(cell.bic)},{conv}"
        )
    _write_text(path, "\n".join(lines) + "\n")


def write_influence_csv(path, report, labels: HardLabels) -> None:
    ranks = np.empty(report.ranking.size, dtype=np.int64)
    ranks[report.ranking - 1] = np.arange(1, report.ranking.size + 1)
    lines = ["j,score,col_label,rank"]
    for j in range(report.scores.size):
        lines.append(
            f"{j + 1},{format_float(report.scores[j])},"
            f"{int(labels.col_labels[j])},{ranks[j]}"
        )
    _write_text(path, "\n".join(lines) + "\n")


def write_timing_csv(path, rows) -> None:
    lines = ["n,d,rep,seconds"]
    lines += [f"{n},{d},{rep},{format_float(sec)}" for n, d, rep, sec in rows]
    _write_text(path, "\n".join(lines) + "\n")


def _json_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _json_emit(value, out, level) -> None:
    pad = "  " * level
    if isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        for idx, (key, item) in enumerate(value.items()):
            out.append(f'{pad}  {json.dumps(str(key))}: ')
            _json_emit(item, out, level + 1)
            out.append(",\n" if idx < len(value) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in value):
            out.append("[" + ", ".join(_json_scalar(v) for v in value) + "]")
            return
        out.append("[\n")
        for idx, item in enumerate(value):
            out.append(pad + "  ")
            _json_emit(item, out, level + 1)
            out.append(",\n" if idx < len(value) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_json_scalar(value))


def dumps_json(value) -> str:
    """Deterministic JSON text: fixed indentation, floats at 17 digits."""
    out = []
    _json_emit(value, out, 0)
    return "".join(out) + "\n"


def write_json(path, value) -> None:
    _write_text(path, dumps_json(value))


def params_to_dict(params: ModelParams) -> dict:
    """Plain nested-list form of the parameters (covariances row-major)."""
    return {
        "row_props": params.row_props.tolist(),
        "col_props": params.col_props.tolist(),
        "coefs": params.coefs.tolist(),
        "means": params.means.tolist(),
        "covs": params.covs.tolist(),
    }


def write_params_json(path, params: ModelParams) -> None:
    write_json(path, params_to_dict(params))


def read_params_json(path) -> ModelParams:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read params file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"params file {path} is not valid JSON: {exc}") from exc
    missing = [k for k in ("row_props", "col_props", "coefs", "means", "covs") if k not in payload]
    if missing:
        raise ParseError(f"params file {path} missing fields: {', '.join(missing)}")
    means = np.array(payload["means"], dtype=float)
    covs = np.array(payload["covs"], dtype=float)
    if means.ndim == 2 and means.shape[1] == 0:
        # p = 0 collapses the nested-list covariances to shape (g, 0)
        covs = covs.reshape((means.shape[0], 0, 0))
    return ModelParams(
        row_props=np.array(payload["row_props"], dtype=float),
        col_props=np.array(payload["col_props"], dtype=float),
        coefs=np.array(payload["coefs"], dtype=float),
        means=means,
        covs=covs,
    )
