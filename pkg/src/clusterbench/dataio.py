"""Dataset file format: delimited text with a self-describing header.

One row per object, F feature columns then one integer label column,
tab-separated. Values carry 17 significant digits so a write/read round
trip reproduces every float64 bit for bit.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .datagen import Dataset, DatasetSpec
from .errors import ParseError

FORMAT_VERSION = "v1"

_HEADER_RE = re.compile(
    r"^# clusterbench-dataset v1; "
    r"C=(?P<C>\d+);F=(?P<F>\d+);Ne=(?P<Ne>\d+);"
    r"alpha=(?P<alpha>[^;]+);seed=(?P<seed>\d+);realization=(?P<realization>\d+)\s*$"
)


def format_header(spec: DatasetSpec) -> str:
    return (
        f"# clusterbench-dataset {FORMAT_VERSION}; "
        f"C={spec.num_classes};F={spec.num_features};Ne={spec.objects_per_class};"
        f"alpha={spec.alpha:.17g};seed={spec.seed};realization={spec.realization_index}"
    )


def write_dataset(dataset: Dataset, path: str | Path) -> Path:
    """Write a dataset to `path` in the v1 format."""
    path = Path(path)
    lines = [format_header(dataset.spec)]
    for row, label in zip(dataset.features, dataset.labels):
        cells = [f"{v:.17g}" for v in row]
        cells.append(str(int(label)))
        lines.append("\t".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_dataset(path: str | Path) -> Dataset:
    """Read a v1 dataset file; raises ParseError naming line and column."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    match = _HEADER_RE.match(lines[0])
    if match is None:
        raise ParseError("malformed or missing dataset header", line=1)
    try:
        spec = DatasetSpec(
            num_classes=int(match["C"]),
            num_features=int(match["F"]),
            objects_per_class=int(match["Ne"]),
            alpha=float(match["alpha"]),
            seed=int(match["seed"]),
            realization_index=int(match["realization"]),
        )
    except Exception as exc:
        raise ParseError(f"invalid header values: {exc}", line=1) from exc

    expected_rows = spec.num_classes * spec.objects_per_class
    body = lines[1:]
    if len(body) < expected_rows:
        raise ParseError(
            f"expected {expected_rows} data rows, found {len(body)}",
            line=len(lines) + 1,
        )
    if len(body) > expected_rows and any(s.strip() for s in body[expected_rows:]):
        raise ParseError(
            f"expected {expected_rows} data rows, found trailing content",
            line=expected_rows + 2,
        )

    features = np.empty((expected_rows, spec.num_features))
    labels = np.empty(expected_rows, dtype=np.int64)
    for i in range(expected_rows):
        line_no = i + 2
        cells = body[i].split("\t")
        if len(cells) != spec.num_features + 1:
            raise ParseError(
                f"expected {spec.num_features + 1} columns, found {len(cells)}",
                line=line_no, column=len(cells),
            )
        for j, cell in enumerate(cells[:-1]):
            try:
                features[i, j] = float(cell)
            except ValueError as exc:
                raise ParseError(
                    f"bad feature value {cell!r}", line=line_no, column=j + 1
                ) from exc
        try:
            label = int(cells[-1])
        except ValueError as exc:
            raise ParseError(
                f"bad label {cells[-1]!r}", line=line_no, column=len(cells)
            ) from exc
        if not 0 <= label < spec.num_classes:
            raise ParseError(
                f"label {label} outside [0, {spec.num_classes})",
                line=line_no, column=len(cells),
            )
        labels[i] = label

    counts = np.bincount(labels, minlength=spec.num_classes)
    if np.any(counts != spec.objects_per_class):
        raise ParseError(
            f"class sizes {counts.tolist()} do not match Ne={spec.objects_per_class}",
            line=len(lines),
        )
    return Dataset(features=features, labels=labels, spec=spec)
