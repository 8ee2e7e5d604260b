"""On-disk formats: dataset CSV, model JSON, and report JSON/CSV.

Floats are written with ``repr`` (shortest round-trip decimal), so reading a
file back reproduces every value bit-for-bit and identical runs produce
identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError
from .evaluation import Dataset
from .kernel import BALL_TOL, KernelSpec
from .solver import DualPredictor

FORMAT_VERSION = 1


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_num(x) for x in v]
    return v


def dumps(obj) -> str:
    return json.dumps(_num(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from None


# -- datasets -----------------------------------------------------------------


def write_dataset_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{k + 1}" for k in range(data.dim)] + ["y"])
        for x, y in zip(data.X, data.y):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


def read_dataset_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path, 1) from None
        dim = len(header) - 1
        expected = [f"x{k + 1}" for k in range(dim)] + ["y"]
        if dim < 1 or [h.strip() for h in header] != expected:
            raise ParseError("header must be x1,...,xd,y", path, 1)
        X, y = [], []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != dim + 1:
                raise ParseError(f"expected {dim + 1} fields, got {len(row)}", path, line)
            try:
                x = [float(v) for v in row[:dim]]
            except ValueError:
                raise ParseError("non-numeric coordinate", path, line) from None
            norm = math.hypot(*x)
            if not norm <= 1.0 + BALL_TOL:
                raise ParseError(f"point outside the unit ball (norm {norm!r})", path, line)
            X.append(x)
            label = row[dim].strip()
            if label not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {label!r}", path, line)
            y.append(int(label))
    if not X:
        raise ParseError("no data rows", path)
    try:
        return Dataset(np.array(X), np.array(y), {"path": str(path)})
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None


# -- models -------------------------------------------------------------------


def model_to_dict(pred: DualPredictor) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "nu": pred.spec.nu,
        "base": pred.spec.base,
        "B": pred.b_budget,
        "alpha": pred.alpha.tolist(),
        "anchors": pred.anchors.tolist(),
        "metadata": dict(pred.metadata),
    }


def model_from_dict(d: dict) -> DualPredictor:
    try:
        if d.get("format_version") != FORMAT_VERSION:
            raise InvalidInputError(f"unsupported model format {d.get('format_version')!r}")
        spec = KernelSpec(nu=float(d["nu"]), base=d.get("base", "linear"))
        return DualPredictor(
            np.array(d["alpha"], dtype=float),
            np.array(d["anchors"], dtype=float),
            spec,
            float(d["B"]),
            metadata=dict(d.get("metadata", {})),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed model file ({exc})") from None


def save_model(pred: DualPredictor, path) -> None:
    write_json(model_to_dict(pred), path)


def load_model(path) -> DualPredictor:
    return model_from_dict(read_json(path))


# -- tabular reports -------------------------------------------------------------


def write_rows_csv(rows, path, fields=None) -> None:
    rows = [_num(r) for r in rows]
    if fields is None:
        fields = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
