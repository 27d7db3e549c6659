"""Zero-padded coefficient vectorization of Jones and Khovanov polynomials.

The window (exponent bounding box) is computed over a whole dataset so
every record maps to a row of the same width; coefficients absent from a
record are zero. The transformers follow the sklearn fit/transform
protocol: fit learns the window, transform builds the matrix, so train
and test splits of one dataset share one feature layout.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .dataset import Dataset
from .errors import DataError

__all__ = [
    "JonesWindow",
    "KhovanovGrid",
    "vectorize_jones",
    "vectorize_khovanov",
    "JonesVectorizer",
    "KhovanovVectorizer",
]


class JonesWindow(NamedTuple):
    min_exp: int
    max_exp: int

    @property
    def width(self) -> int:
        return self.max_exp - self.min_exp + 1


class KhovanovGrid(NamedTuple):
    i_min: int
    i_max: int
    j_min: int
    j_max: int

    @property
    def width(self) -> int:
        return (self.i_max - self.i_min + 1) * (self.j_max - self.j_min + 1)


class JonesVectorizer(BaseEstimator, TransformerMixin):
    """Rows of Jones coefficients over the dataset-wide exponent window."""

    def fit(self, ds: Dataset, y=None):
        if len(ds) == 0:
            raise DataError("cannot compute a Jones window for an empty dataset")
        self.window_ = JonesWindow(
            min(r.jones.min_exp for r in ds),
            max(r.jones.max_exp for r in ds),
        )
        return self

    def transform(self, ds: Dataset) -> np.ndarray:
        window = self.window_
        X = np.zeros((len(ds), window.width))
        for row, rec in enumerate(ds):
            if rec.jones.min_exp < window.min_exp or rec.jones.max_exp > window.max_exp:
                raise DataError(
                    f"{rec.name}: exponent range [{rec.jones.min_exp}, {rec.jones.max_exp}] "
                    f"exceeds fitted window {tuple(window)}"
                )
            start = rec.jones.min_exp - window.min_exp
            X[row, start : start + len(rec.jones.coeffs)] = rec.jones.coeffs
        return X


class KhovanovVectorizer(BaseEstimator, TransformerMixin):
    """Row-major flattening (i outer, j inner) over the dataset-wide grid."""

    def fit(self, ds: Dataset, y=None):
        if len(ds) == 0:
            raise DataError("cannot compute a Khovanov grid for an empty dataset")
        i_vals, j_vals = [], []
        for rec in ds:
            if rec.khovanov is None:
                raise DataError(f"{rec.name}: record has no khovanov data")
            for i, j, _ in rec.khovanov.terms:
                i_vals.append(i)
                j_vals.append(j)
        if not i_vals:
            raise DataError("no khovanov terms anywhere in the dataset")
        self.grid_ = KhovanovGrid(min(i_vals), max(i_vals), min(j_vals), max(j_vals))
        return self

    def transform(self, ds: Dataset) -> np.ndarray:
        grid = self.grid_
        j_span = grid.j_max - grid.j_min + 1
        X = np.zeros((len(ds), grid.width))
        for row, rec in enumerate(ds):
            if rec.khovanov is None:
                raise DataError(f"{rec.name}: record has no khovanov data")
            for i, j, c in rec.khovanov.terms:
                if not (grid.i_min <= i <= grid.i_max and grid.j_min <= j <= grid.j_max):
                    raise DataError(
                        f"{rec.name}: term ({i}, {j}) lies outside fitted grid {tuple(grid)}"
                    )
                X[row, (i - grid.i_min) * j_span + (j - grid.j_min)] = c
        return X


def vectorize_jones(ds: Dataset) -> tuple[np.ndarray, JonesWindow]:
    vec = JonesVectorizer().fit(ds)
    return vec.transform(ds), vec.window_


def vectorize_khovanov(ds: Dataset) -> tuple[np.ndarray, KhovanovGrid]:
    vec = KhovanovVectorizer().fit(ds)
    return vec.transform(ds), vec.grid_
