import math
from io import StringIO

import numpy as np
from scipy.special import logsumexp

from arrhenius.exceptions import ArrheniusError, ConvergenceError, InvalidArgumentError, SwapError
from arrhenius.helper import (
    as_generator,
    canonical_json,
    derive_seed,
    indent_str,
    open_output,
    parallel_map,
    segment_logsumexp,
    stable_hash,
    timed,
    to_cell,
    to_jsonable,
    to_list,
)


def test_to_list():
    assert to_list(0.5) == [0.5]
    assert to_list([0.5, 1.0]) == [0.5, 1.0]
    assert to_list((1, 2)) == [1, 2]
    assert to_list(None) == []


def test_indent_str():
    assert indent_str(level=2) == " " * 6
    assert indent_str(level=1, tabwidth=4) == " " * 4


def test_to_cell():
    assert to_cell(0.1) == "0.1"
    assert float(to_cell(1 / 3)) == 1 / 3
    assert to_cell(np.float64(2.5)) == "2.5"
    assert to_cell(np.int64(7)) == "7"
    assert to_cell(True) == "1" and to_cell(np.bool_(False)) == "0"
    assert to_cell(None) == ""
    assert to_cell(math.nan) == "nan"
    assert to_cell("closed_form") == "closed_form"


def test_to_jsonable():
    out = to_jsonable({"a": np.arange(3), "b": (np.float64(1.5), np.int64(2)), "c": "x"})
    assert out == {"a": [0, 1, 2], "b": [1.5, 2], "c": "x"}
    assert type(out["b"][1]) is int


def test_canonical_json_and_hash():
    assert canonical_json({"b": 1, "a": [1.0, 2]}) == '{"a":[1.0,2],"b":1}'
    assert stable_hash({"a": 1, "b": 2}) == stable_hash({"b": 2, "a": 1})
    assert stable_hash({"a": 1}) != stable_hash({"a": 2})
    assert 0 <= stable_hash("x") < 2**64


def test_derive_seed():
    key = {"graph": {"family": "hypercube", "size": 10}, "sigma_b": 0.1}
    seeds = {derive_seed(0, key, t) for t in range(100)}
    assert len(seeds) == 100
    assert derive_seed(0, key, 5) == derive_seed(0, dict(reversed(list(key.items()))), 5)
    assert derive_seed(1, key, 5) != derive_seed(0, key, 5)
    assert derive_seed(0, {**key, "sigma_b": 0.2}, 5) != derive_seed(0, key, 5)
    assert all(0 <= s < 2**64 for s in seeds)


def test_as_generator():
    rng = np.random.default_rng(0)
    assert as_generator(rng) == (rng, None)
    gen, seed = as_generator(12)
    assert seed == 12 and gen.random() == np.random.default_rng(12).random()
    gen, seed = as_generator(None)
    assert isinstance(gen, np.random.Generator) and seed is None


def test_segment_logsumexp():
    rng = np.random.default_rng(3)
    values = 50 * rng.standard_normal(12)
    indptr = np.array([0, 1, 5, 12])
    expected = [logsumexp(values[a:b]) for a, b in zip(indptr[:-1], indptr[1:])]
    assert np.allclose(segment_logsumexp(values, indptr), expected, rtol=1e-14, atol=0)
    assert segment_logsumexp(np.array([1000.0, 1000.0]), np.array([0, 2]))[0] == 1000 + math.log(2)


def test_parallel_map():
    items = [-3, 1, -2, 5]
    assert parallel_map(abs, items) == [3, 1, 2, 5]
    assert parallel_map(abs, items, workers=2, chunksize=1) == [3, 1, 2, 5]
    assert parallel_map(abs, [], workers=2) == []


def test_timed():
    @timed
    def add(a, b=1):
        return a + b

    assert add(2, b=3) == 5
    assert add.__name__ == "add"


def test_open_output(tmp_path):
    path = tmp_path / "deep" / "dir" / "out.csv"
    with open_output(path) as f:
        f.write("a\nb\n")
    assert path.read_bytes() == b"a\nb\n"
    buf = StringIO()
    assert open_output(buf) is buf


def test_exception_messages():
    assert str(ArrheniusError("plain")) == "'plain'"
    assert str(InvalidArgumentError("bad n", context="hypercube")) == "hypercube: bad n"
    assert isinstance(InvalidArgumentError("x"), ValueError)
    e = SwapError("cap reached", accepted=1, proposed=10, rejected=9)
    assert str(e) == "edge swaps: cap reached" and e.rejected == 9
    e = ConvergenceError("slow", iterations=5, residual=0.1)
    assert e.context == "stationary solve" and e.iterations == 5
