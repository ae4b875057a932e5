"""CSV ingestion and JSON persistence of fitted models."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .estimator import FitConfig, FitResult
from .kde import KernelScheme
from .raf import parse_raf

__all__ = [
    "Dataset",
    "ModelArchive",
    "ingest_csv",
    "ingest_rows",
    "save_archive",
    "load_archive",
    "fit_to_archive",
    "archive_to_fit",
    "MISSING_TOKENS",
    "IngestError",
    "config_to_dict",
    "config_from_dict",
]

FORMAT_NAME = "wlecov-model"
FORMAT_VERSION = 1
MISSING_TOKENS = frozenset({"", "na", "nan", "null", "none", "?"})


@dataclass
class Dataset:
    columns: list
    data: np.ndarray
    labels: np.ndarray | None = None
    label_name: str | None = None
    rejected_rows: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


class IngestError(ValueError):
    """A cell could not be parsed; ``row`` and ``column`` locate it."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column



def ingest_csv(path, delimiter: str = ",", header: bool = True, label_col: str | int | None = None,
               columns=None) -> Dataset:
    """Read a delimited numeric table.

    Rows containing a missing cell (empty, ``NA``, ``NaN``, ``?``) are dropped
    and their 1-based data-row indices recorded in ``rejected_rows``.

    Parameters
    ----------
    path : str or Path
    delimiter : str, default=","
    header : bool, default=True
        First line holds column names; otherwise columns are named ``x1..xp``.
    label_col : str or int, optional
        Categorical column kept aside as ``labels``.
    columns : list of str, optional
        Numeric columns to keep, in this order. Defaults to every column
        except the label.

    Raises
    ------
    IngestError
        On a non-numeric cell, naming its data row (1-based) and column.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    return ingest_rows(rows, header=header, label_col=label_col, columns=columns, source=str(path))


def ingest_rows(rows, header: bool = True, label_col: str | int | None = None, columns=None,
                source: str = "<rows>") -> Dataset:
    """Same as :func:`ingest_csv` for rows already split into cells."""
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise IngestError(f"{source}: no data")
    if header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
    else:
        names = [f"x{j + 1}" for j in range(len(rows[0]))]
        body = rows
    width = len(names)

    label_idx = None
    if label_col is not None:
        if isinstance(label_col, int):
            label_idx = label_col
        elif label_col in names:
            label_idx = names.index(label_col)
        else:
            raise IngestError(f"label column {label_col!r} not found; have {names}")
    if columns is None:
        keep = [j for j in range(width) if j != label_idx]
    else:
        missing = [c for c in columns if c not in names]
        if missing:
            raise IngestError(f"columns {missing} not found; have {names}")
        keep = [names.index(c) for c in columns]

    values, labels, rejected = [], [], []
    for i, row in enumerate(body, start=1):
        if len(row) != width:
            raise IngestError(f"row {i} has {len(row)} fields, expected {width}", row=i)
        cells = [row[j].strip() for j in keep]
        if any(c.lower() in MISSING_TOKENS for c in cells) or (
            label_idx is not None and row[label_idx].strip().lower() in MISSING_TOKENS
        ):
            rejected.append(i)
            continue
        parsed = []
        for j, c in zip(keep, cells):
            try:
                v = float(c)
            except ValueError:
                raise IngestError(
                    f"row {i}, column {names[j]!r}: cannot parse {c!r} as a number", row=i, column=names[j]
                ) from None
            if not math.isfinite(v):
                raise IngestError(f"row {i}, column {names[j]!r}: non-finite value", row=i, column=names[j])
            parsed.append(v)
        values.append(parsed)
        if label_idx is not None:
            labels.append(row[label_idx].strip())
    data = np.array(values, dtype=float).reshape(len(values), len(keep))
    return Dataset(
        columns=[names[j] for j in keep],
        data=data,
        labels=np.array(labels) if label_idx is not None else None,
        label_name=names[label_idx] if label_idx is not None else None,
        rejected_rows=rejected,
    )


# -- model archives ------------------------------------------------------------

@dataclass
class ModelArchive:
    kind: str
    config: dict
    payload: dict
    version: int = FORMAT_VERSION

    def to_json(self) -> str:
        doc = {"format": FORMAT_NAME, "version": self.version, "kind": self.kind,
               "config": self.config, "payload": self.payload}
        return json.dumps(doc, indent=1, allow_nan=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelArchive":
        doc = json.loads(text)
        if doc.get("format") != FORMAT_NAME:
            raise ValueError("not a wlecov model archive")
        if int(doc.get("version", 0)) > FORMAT_VERSION:
            raise ValueError(f"archive version {doc['version']} is newer than supported {FORMAT_VERSION}")
        return cls(kind=doc["kind"], config=doc.get("config", {}), payload=doc.get("payload", {}),
                   version=int(doc["version"]))


def save_archive(archive: ModelArchive, path) -> None:
    Path(path).write_text(archive.to_json())


def load_archive(path) -> ModelArchive:
    return ModelArchive.from_json(Path(path).read_text())


def config_to_dict(config: FitConfig) -> dict:
    return {
        "kernel": config.kernel,
        "raf": config.raf.to_string(),
        "bandwidth": config.bandwidth,
        "target_downweighting": config.target_downweighting,
        "init": config.init,
        "n_subsamples": config.n_subsamples,
        "random_state": config.random_state,
        "max_iter": config.max_iter,
        "tol": config.tol,
        "smooth_model": config.smooth_model,
    }


def config_from_dict(d: dict) -> FitConfig:
    known = set(FitConfig.__dataclass_fields__)
    return FitConfig(**{k: v for k, v in d.items() if k in known})



def fit_to_archive(fit: FitResult, config: FitConfig, extra: dict | None = None) -> ModelArchive:
    """Package a fit, its configuration and any extra payload entries."""
    payload = {
        "location": fit.location.tolist(),
        "scatter": fit.scatter.tolist(),
        "weights": fit.weights.tolist(),
        "squared_distances": fit.squared_distances.tolist(),
        "iterations": fit.iterations,
        "converged": bool(fit.converged),
        "gamma": fit.gamma,
        "kernel": fit.scheme.variant if fit.scheme is not None else None,
        "bandwidth": fit.scheme.bandwidth if fit.scheme is not None else None,
        "raf": fit.raf.to_string() if fit.raf is not None else None,
        "criterion": fit.criterion,
        "start_index": fit.start_index,
        "n_starts": fit.n_starts,
        "n_converged": fit.n_converged,
        "downweighting": fit.downweighting,
    }
    if extra:
        payload.update(extra)
    return ModelArchive(kind="wle-fit", config=config_to_dict(config), payload=payload)


def archive_to_fit(archive: ModelArchive) -> FitResult:
    if archive.kind != "wle-fit":
        raise ValueError(f"expected a 'wle-fit' archive, got {archive.kind!r}")
    d = archive.payload
    scheme = None
    if d.get("kernel") is not None:
        scheme = KernelScheme(d["kernel"], float(d["bandwidth"]))
    return FitResult(
        location=np.asarray(d["location"], dtype=float),
        scatter=np.asarray(d["scatter"], dtype=float),
        weights=np.asarray(d["weights"], dtype=float),
        squared_distances=np.asarray(d["squared_distances"], dtype=float),
        iterations=int(d["iterations"]),
        converged=bool(d["converged"]),
        gamma=float(d["gamma"]),
        scheme=scheme,
        raf=parse_raf(d["raf"]) if d.get("raf") else None,
        criterion=float(d.get("criterion", float("nan"))),
        start_index=int(d.get("start_index", -1)),
        n_starts=int(d.get("n_starts", 1)),
        n_converged=int(d.get("n_converged", 1)),
    )
