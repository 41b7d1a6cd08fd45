import io as stdio

import numpy as np
import pytest

from icsfds import io
from icsfds.errors import ParseError


def test_numeric_roundtrip(tmp_path, rng):
    x = rng.normal(size=(7, 3)) * 10.0 ** rng.integers(-20, 20, size=(7, 3))
    path = tmp_path / "x.csv"
    io.write_matrix_csv(x, ["a", "b", "c"], path)
    header, y = io.read_numeric_csv(path)
    assert header == ["a", "b", "c"]
    np.testing.assert_array_equal(x, y)


@pytest.mark.parametrize("text,row,col", [
    ("a,b\n1,2\n3,x\n", 2, 2),
    ("a,b\nfoo,2\n", 1, 1),
    ("a,b\n1,2\n1,nan\n", 2, 2),
    ("a,b\n1,inf\n", 1, 2),
])
def test_parse_error_location(text, row, col):
    with pytest.raises(ParseError) as ei:
        io.read_numeric_csv(stdio.StringIO(text))
    assert (ei.value.row, ei.value.column) == (row, col)
    assert f"row {row}, column {col}" in str(ei.value)


def test_parse_error_shapes():
    with pytest.raises(ParseError, match="header row"):
        io.read_numeric_csv(stdio.StringIO(""))
    with pytest.raises(ParseError, match="no data rows"):
        io.read_numeric_csv(stdio.StringIO("a,b\n"))
    with pytest.raises(ParseError) as ei:
        io.read_numeric_csv(stdio.StringIO("a,b\n1,2\n1,2,3\n"))
    assert ei.value.row == 2
    with pytest.raises(ParseError):
        io.read_numeric_csv(stdio.StringIO("a,\n1,2\n"))


def test_blank_lines_skipped():
    _, x = io.read_numeric_csv(stdio.StringIO("a,b\n1,2\n\n3,4\n"))
    assert x.tolist() == [[1, 2], [3, 4]]


def test_dict_rows_roundtrip(tmp_path):
    rows = [dict(name="x", k=3, v=0.1 + 0.2, ok=True, pair=(1, 2)),
            dict(name="y", k=4, v=-1e-300, ok=False, pair=(3,))]
    path = tmp_path / "r.csv"
    io.write_csv(rows, path)
    back = io.read_csv(path)
    assert back[0] == dict(name="x", k=3, v=0.1 + 0.2, ok=True, pair="1 2")
    assert back[1]["v"] == -1e-300 and back[1]["ok"] is False and back[1]["pair"] == 3


def test_column_dict_csv(tmp_path):
    path = tmp_path / "c.csv"
    io.write_csv({"a": np.arange(3), "b": np.array([0.5, 1.5, 2.5])}, path, ["b", "a"])
    assert path.read_text().splitlines() == ["b,a", "0.5,0", "1.5,1", "2.5,2"]


def test_json_roundtrip(tmp_path):
    obj = dict(a=np.array([1.0, np.nan]), b=np.int64(3), c=np.bool_(True), d=(1, 2))
    path = tmp_path / "o.json"
    io.write_json(obj, path)
    assert io.read_json(path) == dict(a=[1.0, None], b=3, c=True, d=[1, 2])
    x = 0.1 + 0.2
    assert io.read_json(stdio.StringIO(io.dumps_json([x])))[0] == x
