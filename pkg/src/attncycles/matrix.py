"""Named feature vectors/matrices and their on-disk formats.

A matrix is exported as CSV or JSONL plus a sidecar JSON file that freezes
the feature-name order, so column indices stay portable across runs.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

#: Bumped whenever the feature dictionary layout changes.
FEATURE_DICTIONARY_VERSION = "1"


def dictionary_fingerprint(names: Sequence[str]) -> str:
    """Stable short hash of an ordered feature-name list."""
    digest = hashlib.sha256("\n".join(names).encode("utf-8")).hexdigest()
    return digest[:16]


@dataclass(frozen=True)
class FeatureVector:
    """Ordered (name, value) pairs for a single item."""

    names: tuple
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if len(self.names) != self.values.shape[0]:
            raise ValueError("names and values length mismatch")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names are not unique")
        if not np.all(np.isfinite(self.values)):
            bad = [n for n, v in zip(self.names, self.values) if not np.isfinite(v)]
            raise ValueError(f"non-finite feature values: {bad[:5]}")

    def __len__(self) -> int:
        return len(self.names)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def items(self):
        return zip(self.names, (float(v) for v in self.values))


class FeatureMatrix:
    """Row-id-indexed 2D feature matrix with a fixed name order."""

    def __init__(self, ids: Sequence[str], names: Sequence[str], values: np.ndarray):
        self.ids = list(ids)
        self.names = list(names)
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.shape != (len(self.ids), len(self.names)):
            raise ValueError(
                f"matrix shape {self.values.shape} does not match "
                f"{len(self.ids)} ids x {len(self.names)} names"
            )
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names are not unique")
        self._row_index = {vid: i for i, vid in enumerate(self.ids)}

    @property
    def shape(self):
        return self.values.shape

    @property
    def fingerprint(self) -> str:
        return dictionary_fingerprint(self.names)

    def row(self, item_id: str) -> FeatureVector:
        return FeatureVector(tuple(self.names), self.values[self._row_index[item_id]])

    def select_rows(self, ids: Iterable[str]) -> "FeatureMatrix":
        ids = list(ids)
        idx = [self._row_index[i] for i in ids]
        return FeatureMatrix(ids, self.names, self.values[idx])

    def select_columns(self, names: Sequence[str]) -> "FeatureMatrix":
        col_index = {n: j for j, n in enumerate(self.names)}
        missing = [n for n in names if n not in col_index]
        if missing:
            raise KeyError(f"unknown feature names: {missing[:5]}")
        idx = [col_index[n] for n in names]
        return FeatureMatrix(self.ids, list(names), self.values[:, idx])

    @staticmethod
    def hstack(parts: Sequence["FeatureMatrix"]) -> "FeatureMatrix":
        if not parts:
            raise ValueError("nothing to stack")
        ids = parts[0].ids
        for p in parts[1:]:
            if p.ids != ids:
                raise ValueError("row ids differ between stacked matrices")
        names: list = []
        for p in parts:
            names.extend(p.names)
        values = np.hstack([p.values for p in parts])
        return FeatureMatrix(ids, names, values)

    # -- persistence --------------------------------------------------------

    def sidecar_dict(self) -> dict:
        return {
            "version": FEATURE_DICTIONARY_VERSION,
            "fingerprint": self.fingerprint,
            "names": self.names,
        }

    def save(self, path, fmt: str = "csv") -> None:
        """Write the matrix plus a ``<path>.names.json`` sidecar."""
        path = Path(path)
        sidecar = path.with_name(path.name + ".names.json")
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(self.sidecar_dict(), fh, sort_keys=True)
            fh.write("\n")
        if fmt == "csv":
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["id", *self.names])
                for i, item_id in enumerate(self.ids):
                    writer.writerow([item_id, *(repr(float(v)) for v in self.values[i])])
        elif fmt == "jsonl":
            with open(path, "w", encoding="utf-8") as fh:
                for i, item_id in enumerate(self.ids):
                    fh.write(json.dumps({"id": item_id, "values": self.values[i].tolist()}))
                    fh.write("\n")
        else:
            raise ValueError(f"unknown matrix format: {fmt!r}")

    @classmethod
    def load(cls, path) -> "FeatureMatrix":
        path = Path(path)
        sidecar = path.with_name(path.name + ".names.json")
        with open(sidecar, encoding="utf-8") as fh:
            names = json.load(fh)["names"]
        ids = []
        rows = []
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
            fh.seek(0)
            if first.startswith("id,"):
                reader = csv.reader(fh)
                next(reader)
                for rec in reader:
                    ids.append(rec[0])
                    rows.append([float(v) for v in rec[1:]])
            else:
                for line in fh:
                    obj = json.loads(line)
                    ids.append(obj["id"])
                    rows.append(obj["values"])
        values = np.array(rows, dtype=np.float64).reshape(len(ids), len(names))
        return cls(ids, names, values)
