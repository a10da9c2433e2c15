"""CSV dataset ingestion (header row, comma-separated, plain decimals)."""

import csv

import numpy as np

from .errors import ParseError, SchemaError
from .model import Dataset


def load_dataset_csv(path, class_labels, label_column="label",
                     feature_columns=None) -> Dataset:
    """Parse a CSV into a Dataset, mapping label text to class indices.

    Row/column context is reported for every parse failure; rows are
    numbered from 1 at the first data row.
    """
    class_labels = [str(c) for c in class_labels]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise SchemaError(
                f"{path}: missing label column {label_column!r}; header has {header}"
            )
        if feature_columns is None:
            feature_columns = [h for h in header if h != label_column]
        missing = [c for c in feature_columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing feature columns {missing}")
        feat_idx = [header.index(c) for c in feature_columns]
        label_idx = header.index(label_column)
        rows, labels = [], []
        for i, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise ParseError(
                    f"{path}: row {i}: expected {len(header)} cells, found {len(record)}"
                )
            values = []
            for j, name in zip(feat_idx, feature_columns):
                cell = record[j].strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {i}, column {name!r}: "
                        f"could not parse {cell!r} as a number"
                    ) from None
            label_text = record[label_idx].strip()
            if label_text not in class_labels:
                raise SchemaError(
                    f"{path}: row {i}: unknown label {label_text!r}; "
                    f"allowed labels: {class_labels}"
                )
            rows.append(values)
            labels.append(class_labels.index(label_text))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return Dataset(
        rows=np.asarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        feature_names=tuple(feature_columns),
    )


def save_dataset_csv(dataset: Dataset, class_labels, path, label_column="label"):
    """Write a Dataset back out in the same format load_dataset_csv reads."""
    names = dataset.feature_names or tuple(
        f"x{j}" for j in range(dataset.rows.shape[1])
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + [label_column])
        for row, label in zip(dataset.rows, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [class_labels[int(label)]])
