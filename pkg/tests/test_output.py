import json
import math

from hypothesis import given
from hypothesis import strategies as st

from gptbell.output import fmt, to_csv, to_json, to_text

values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6) | st.floats(allow_nan=False, allow_infinity=False) | st.text(max_size=5),
    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(max_size=4), inner, max_size=4),
    max_leaves=12,
)


@given(values)
def test_json_round_trip_is_stable(doc):
    once = to_json(doc)
    assert to_json(json.loads(once)) == once


def test_json_precision_and_nonfinite():
    doc = json.loads(to_json({"x": math.pi, "y": float("nan"), "z": -0.0}))
    assert doc == {"x": 3.14159265359, "y": None, "z": 0.0}


def test_fmt():
    assert fmt(0.5) == "0.500000"
    assert fmt(True) == "yes"
    assert fmt(None) == "-"
    assert fmt([1.0, 2.0]) == "(1.000000, 2.000000)"


def test_csv_layout():
    text = to_csv([{"a": 1, "b": 0.25}, {"a": 2, "b": None}], ["a", "b"])
    assert text == "a,b\n1,0.25\n2,\n"


def test_text_table():
    doc = {"command": "x", "space": "s", "summary": [("k", 1.0)], "columns": ["n", "v"], "table": [{"n": 3, "v": 0.5}]}
    out = to_text(doc)
    assert out.splitlines()[0] == "# x s"
    assert "0.500000" in out
