import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quantdea.dataset import (
    PAPER_EXAMPLE,
    Dataset,
    Firm,
    PointSet,
    builtin_dataset,
    exp_transform,
    load_dataset,
    parse_csv,
    swap_negate,
    to_csv,
)
from quantdea.errors import DataError, NumericalFailure, PreconditionError

GOOD = "id,x1,x2,y1\na,1,3,2\nb,2,2,2.5\n"


class TestParse:
    def test_good(self):
        ds = parse_csv(GOOD, 2, 1)
        assert ds.ids == ("a", "b")
        assert ds.X.tolist() == [[1, 3], [2, 2]]
        assert ds.Y.tolist() == [[2], [2.5]]
        assert not ds.is_integer

    def test_bytes_with_bom(self):
        ds = parse_csv(("﻿" + GOOD).encode(), 2, 1)
        assert ds.ell == 2

    def test_blank_lines_ignored(self):
        assert parse_csv(GOOD.replace("\n", "\n\n"), 2, 1).ell == 2

    @pytest.mark.parametrize(
        "text,msg",
        [
            ("", "empty"),
            ("id,x1,x2,y1\n", "no data"),
            ("id,x1,y1\na,1,2\n", "header"),
            ("id,x1,x2,y1\na,1,2\n", "row 2"),
            ("id,x1,x2,y1\na,1,q,2\n", "non-numeric"),
            ("id,x1,x2,y1\na,1,-2,2\n", "negative"),
            ("id,x1,x2,y1\na,1,inf,2\n", "non-finite"),
            ("id,x1,x2,y1\na,1,2,2\na,1,2,3\n", "duplicate"),
        ],
    )
    def test_bad(self, text, msg):
        with pytest.raises(DataError, match=msg):
            parse_csv(text, 2, 1)

    def test_dims(self):
        with pytest.raises(DataError):
            parse_csv(GOOD, 0, 3)

    def test_not_utf8(self):
        with pytest.raises(DataError):
            parse_csv(b"\xff\xfe\x00", 1, 1)

    @given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(2, 5)), elements=st.floats(0, 1e6)))
    def test_csv_roundtrip(self, M):
        ds = Dataset(M[:, :1], M[:, 1:])
        back = parse_csv(to_csv(ds), 1, M.shape[1] - 1)
        assert back == ds


class TestPointSet:
    def test_builtin_example(self):
        assert PAPER_EXAMPLE.ell == 7 and PAPER_EXAMPLE.m == 2 and PAPER_EXAMPLE.n == 1
        assert PAPER_EXAMPLE.integral
        assert PAPER_EXAMPLE.firms[6] == Firm("7", (4.0, 4.0), (5.0,))

    def test_arrays_read_only(self):
        with pytest.raises(ValueError):
            PAPER_EXAMPLE.X[0, 0] = 9.0

    def test_validation(self):
        with pytest.raises(DataError):
            PointSet(np.zeros((2, 1)), np.zeros((3, 1)))
        with pytest.raises(DataError):
            PointSet(np.zeros((0, 1)), np.zeros((0, 1)))
        with pytest.raises(DataError):
            PointSet([[np.nan]], [[1.0]])
        with pytest.raises(DataError):
            Dataset([[-1.0]], [[1.0]])
        with pytest.raises(DataError):
            PointSet([[1.0]], [[1.0]], ("a", "b"))

    def test_negative_allowed_in_pointset(self):
        assert PointSet([[-1.0]], [[2.0]]).ell == 1

    def test_index_of(self):
        assert PAPER_EXAMPLE.index_of("3") == 2
        assert PAPER_EXAMPLE.index_of(0) == 0
        with pytest.raises(PreconditionError):
            PAPER_EXAMPLE.index_of("99")
        with pytest.raises(PreconditionError):
            PAPER_EXAMPLE.index_of(7)

    def test_equality_and_hash(self):
        a = Dataset([[1.0]], [[2.0]])
        b = Dataset(np.array([[1.0]]), np.array([[2.0]]))
        assert a == b and hash(a) == hash(b)
        assert a != Dataset([[1.0]], [[3.0]])

    def test_shift(self):
        s = PAPER_EXAMPLE.shifted(-10.0)
        assert s.X[0].tolist() == [-9.0, -7.0]
        assert not isinstance(s, Dataset)


class TestSwap:
    def test_example(self):
        sw = swap_negate(Dataset([[1.0, 3.0]], [[2.0]]))
        assert sw.X.tolist() == [[-2.0]]
        assert sw.Y.tolist() == [[-1.0, -3.0]]

    def test_involution(self):
        back = swap_negate(swap_negate(PAPER_EXAMPLE))
        assert np.array_equal(back.X, PAPER_EXAMPLE.X) and np.array_equal(back.Y, PAPER_EXAMPLE.Y)
        assert back.ids == PAPER_EXAMPLE.ids

    def test_dimensions_swap(self):
        sw = swap_negate(PAPER_EXAMPLE)
        assert (sw.m, sw.n) == (1, 2)


class TestExpTransform:
    def test_values(self):
        e = exp_transform(PAPER_EXAMPLE, 0.5)
        assert np.allclose(e.X, np.exp(0.5 * PAPER_EXAMPLE.X))
        assert np.all(e.Y > 0)

    def test_guards(self):
        with pytest.raises(PreconditionError):
            exp_transform(PAPER_EXAMPLE, 0.0)
        with pytest.raises(NumericalFailure):
            exp_transform(PAPER_EXAMPLE, 500.0)
        with pytest.raises(NumericalFailure):
            exp_transform(Dataset([[1000.0]], [[1.0]]), -1.0)


class TestLoad:
    def test_builtin(self):
        assert load_dataset("paper-example") is PAPER_EXAMPLE
        with pytest.raises(DataError):
            builtin_dataset("nope")

    def test_file(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text(GOOD)
        assert load_dataset(str(p), 2, 1).ell == 2

    def test_file_needs_dims(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text(GOOD)
        with pytest.raises(DataError):
            load_dataset(str(p))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_dataset(str(tmp_path / "missing.csv"), 2, 1)
