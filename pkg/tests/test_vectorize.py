import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_record
from knotstat.dataset import Dataset
from knotstat.errors import DataError
from knotstat.polynomials import LaurentPoly1
from knotstat.vectorize import (
    JonesVectorizer,
    KhovanovVectorizer,
    vectorize_jones,
    vectorize_khovanov,
)


def jones_dataset(*polys):
    return Dataset(
        tuple(make_record(f"k{i}", p) for i, p in enumerate(polys))
    )


class TestVectorizeJones:
    def test_window_spans_union(self):
        ds = jones_dataset((-2, [1, 1, 1, 1, 1]), (0, [2, 2, 2, 2]))
        X, window = vectorize_jones(ds)
        assert window == (-2, 3)
        assert X.shape == (2, 6)
        np.testing.assert_array_equal(X[1], [0, 0, 2, 2, 2, 2])

    def test_single_record_no_padding(self, fig8):
        ds = Dataset((make_record("only", fig8),))
        X, window = vectorize_jones(ds)
        np.testing.assert_array_equal(X[0], fig8.coeffs)
        assert window == (fig8.min_exp, fig8.max_exp)

    def test_identical_records_identical_rows(self):
        ds = jones_dataset((0, [1, 2, 3]), (0, [1, 2, 3]), (0, [1, 2, 3]))
        X, _ = vectorize_jones(ds)
        assert np.all(X == X[0])

    def test_empty_dataset_errors(self):
        with pytest.raises(DataError):
            vectorize_jones(Dataset(()))

    def test_transform_rejects_record_outside_window(self):
        vec = JonesVectorizer().fit(jones_dataset((0, [1, 1])))
        wide = jones_dataset((-1, [1, 1, 1]))
        with pytest.raises(DataError):
            vec.transform(wide)

    @given(
        polys=st.lists(
            st.tuples(
                st.integers(-6, 6),
                st.lists(st.integers(-9, 9), min_size=1, max_size=7),
            ),
            min_size=1,
            max_size=8,
        ),
        seed=st.integers(0, 10_000),
    )
    @settings(max_examples=40)
    def test_rows_reconstruct_polynomials_and_permutation_invariance(self, polys, seed):
        records = []
        for i, (min_exp, coeffs) in enumerate(polys):
            if coeffs[0] == 0 or coeffs[-1] == 0:
                return
            records.append(make_record(f"k{i}", (min_exp, coeffs)))
        ds = Dataset(tuple(records))
        X, window = vectorize_jones(ds)
        assert X.shape[1] == window.max_exp - window.min_exp + 1

        # reading a row back through the window reconstructs the polynomial
        for row, rec in zip(X, records):
            rebuilt = LaurentPoly1.make(
                window.min_exp, [int(v) for v in row]
            )
            assert rebuilt == rec.jones

        # the window (hence row width) does not depend on record order
        order = np.random.default_rng(seed).permutation(len(records))
        shuffled = Dataset(tuple(records[i] for i in order))
        X2, window2 = vectorize_jones(shuffled)
        assert window2 == window
        for pos, original_index in enumerate(order):
            np.testing.assert_array_equal(X2[pos], X[original_index])


class TestVectorizeKhovanov:
    def test_grid_is_bounding_box(self):
        ds = Dataset(
            (
                make_record("a", (0, [1]), khovanov=[(0, 0, 1)]),
                make_record("b", (0, [1]), khovanov=[(1, 2, -3)]),
            )
        )
        X, grid = vectorize_khovanov(ds)
        assert grid == (0, 1, 0, 2)
        assert X.shape == (2, 6)
        np.testing.assert_array_equal(X[0], [1, 0, 0, 0, 0, 0])
        np.testing.assert_array_equal(X[1], [0, 0, 0, 0, 0, -3])

    def test_single_term_record(self):
        ds = Dataset((make_record("a", (0, [1]), khovanov=[(4, -1, 7)]),))
        X, grid = vectorize_khovanov(ds)
        np.testing.assert_array_equal(X, [[7.0]])
        assert grid == (4, 4, -1, -1)

    def test_term_order_irrelevant(self):
        terms = [(0, 1, 2), (1, 3, -1), (2, 5, 4)]
        a = Dataset((make_record("a", (0, [1]), khovanov=terms),))
        b = Dataset((make_record("a", (0, [1]), khovanov=list(reversed(terms))),))
        Xa, ga = vectorize_khovanov(a)
        Xb, gb = vectorize_khovanov(b)
        assert ga == gb
        np.testing.assert_array_equal(Xa, Xb)

    def test_missing_khovanov_errors(self):
        ds = Dataset(
            (
                make_record("a", (0, [1]), khovanov=[(0, 0, 1)]),
                make_record("b", (0, [1])),
            )
        )
        with pytest.raises(DataError, match="no khovanov"):
            vectorize_khovanov(ds)

    def test_row_major_layout(self):
        # i outer, j inner: term (i, j) lands at (i-i_min)*j_span + (j-j_min)
        ds = Dataset(
            (
                make_record(
                    "a", (0, [1]), khovanov=[(0, 0, 1), (0, 2, 2), (1, 1, 3)]
                ),
            )
        )
        X, grid = vectorize_khovanov(ds)
        assert grid == (0, 1, 0, 2)
        np.testing.assert_array_equal(X[0], [1, 0, 2, 0, 3, 0])


class TestSklearnInterface:
    def test_fit_transform_and_get_params(self):
        ds = jones_dataset((0, [1, 2]), (2, [3]))
        vec = JonesVectorizer()
        X = vec.fit_transform(ds)
        assert X.shape == (2, 3)  # window spans exponents 0..2
        assert vec.get_params() == {}

    def test_shared_window_between_splits(self):
        full = jones_dataset((-2, [1, 1, 1]), (0, [1, 1, 1]), (1, [2, 2]))
        vec = JonesVectorizer().fit(full)
        part = Dataset(full.records[:1])
        X = vec.transform(part)
        assert X.shape == (1, 5)

    def test_khovanov_vectorizer_clonable(self):
        from sklearn.base import clone

        vec = KhovanovVectorizer()
        assert isinstance(clone(vec), KhovanovVectorizer)
