"""Bundled example data and an optional loader for the 1985 automobile data.

``load_stars_cyg``
    Effective temperature and light intensity (log scale) of 47 stars in the
    CYG OB1 cluster (robustbase ``starsCYG``).
``load_diabetes``
    Reaven-Miller diabetes study, 145 non-obese adults in three clinical
    groups (heplots ``Diabetes``). ``glutest``, ``instest`` and ``sspg`` are
    the glucose area, insulin area and steady-state plasma glucose.
``load_auto``
    UCI ``imports-85`` automobile data, read from a local copy because it is
    not redistributed here. Set ``WLECOV_AUTO_CSV`` or pass ``path``.
"""

from __future__ import annotations

import csv
import os
from importlib import resources

from ..io import Dataset, ingest_csv, ingest_rows

__all__ = ["load_stars_cyg", "load_diabetes", "load_auto", "auto_available", "AUTO_COLUMNS"]

DIABETES_FEATURES = ("glutest", "instest", "sspg")

# raw imports-85.data column order (no header, '?' for missing)
_AUTO_RAW = (
    "symboling", "normalized_losses", "make", "fuel_type", "aspiration", "num_of_doors",
    "body_style", "drive_wheels", "engine_location", "wheel_base", "length", "width",
    "height", "curb_weight", "engine_type", "num_of_cylinders", "engine_size",
    "fuel_system", "bore", "stroke", "compression_ratio", "horsepower", "peak_rpm",
    "city_mpg", "highway_mpg", "price",
)

# the 15 numeric variables used for the analyses; normalized_losses is left
# out because a fifth of it is missing
AUTO_COLUMNS = (
    "symboling", "wheel_base", "length", "width", "height", "curb_weight", "engine_size",
    "bore", "stroke", "compression_ratio", "horsepower", "peak_rpm", "city_mpg",
    "highway_mpg", "price",
)


def _bundled(name):
    return resources.files(__name__).joinpath(name)


def load_stars_cyg() -> Dataset:
    with resources.as_file(_bundled("stars_cyg.csv")) as path:
        return ingest_csv(path)


def load_diabetes(columns=DIABETES_FEATURES) -> Dataset:
    """Diabetes data with the ``group`` column as labels."""
    with resources.as_file(_bundled("diabetes.csv")) as path:
        return ingest_csv(path, label_col="group", columns=list(columns))


def _auto_path(path):
    return path if path is not None else os.environ.get("WLECOV_AUTO_CSV")


def auto_available(path=None) -> bool:
    p = _auto_path(path)
    return bool(p) and os.path.isfile(p)


def load_auto(path=None) -> Dataset:
    """Automobile data restricted to :data:`AUTO_COLUMNS`, labelled by fuel type.

    Accepts either the raw UCI file (26 unnamed columns) or a CSV with a
    header containing the :data:`AUTO_COLUMNS` names (underscores or hyphens)
    and ``fuel_type``. Rows with a missing value in those columns are dropped.
    """
    p = _auto_path(path)
    if not p or not os.path.isfile(p):
        raise FileNotFoundError("automobile data not found; set WLECOV_AUTO_CSV to a local copy")
    with open(p, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    first = [c.strip().replace("-", "_").lower() for c in rows[0]]
    if "fuel_type" in first:
        rows[0] = first
    else:
        rows.insert(0, list(_AUTO_RAW))
    return ingest_rows(rows, label_col="fuel_type", columns=list(AUTO_COLUMNS), source=p)
