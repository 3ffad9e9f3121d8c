from io import StringIO

import networkx as nx
import numpy as np
import pytest

from arrhenius.exceptions import GraphError, InvalidArgumentError, SwapError
from arrhenius.graphs import (
    Graph,
    GraphSpec,
    circulant,
    complete_graph,
    cycle,
    get_family,
    hypercube,
    known_families,
    random_regular,
    random_regular_by_swaps,
    read_edge_list,
    regular_offsets,
    validate,
    write_edge_list,
)


def test_complete_graph():
    g = complete_graph(5)
    assert (g.n, g.num_edges, g.degree) == (5, 10, 4)
    assert validate(g).ok


def test_hypercube():
    g = hypercube(3)
    assert (g.n, g.num_edges, g.degree) == (8, 12, 3)
    assert g.neighbors(0).tolist() == [1, 2, 4]
    assert g.neighbors(5).tolist() == [1, 4, 7]
    assert validate(g).ok

    with pytest.raises(InvalidArgumentError):
        hypercube(0)
    with pytest.raises(InvalidArgumentError):
        hypercube(31)


def test_cycle():
    g = cycle(5)
    assert (g.n, g.num_edges, g.degree) == (5, 5, 2)
    assert g.neighbors(0).tolist() == [1, 4]
    with pytest.raises(InvalidArgumentError):
        cycle(2)


def test_circulant():
    g = circulant(1024, [1, 2, 3])
    assert g.degree == 6
    assert validate(g).ok

    # the n/2 chord is listed once
    g = circulant(8, regular_offsets(8, 3))
    assert g.degree == 3 and g.num_edges == 12
    assert validate(g).ok

    with pytest.raises(InvalidArgumentError):
        circulant(8, [1, 1])
    with pytest.raises(InvalidArgumentError):
        circulant(8, [5])
    with pytest.raises(GraphError) as e:
        circulant(8, [2, 4])
    assert e.value.diagnostics["components"] == 2


def test_regular_offsets():
    assert regular_offsets(1024, 8) == [1, 2, 3, 4]
    assert regular_offsets(10, 3) == [1, 5]
    with pytest.raises(InvalidArgumentError):
        regular_offsets(9, 3)
    with pytest.raises(InvalidArgumentError):
        regular_offsets(4, 4)


def test_oriented_edges():
    g = hypercube(3)
    o = g.oriented
    assert len(o.src) == 2 * g.num_edges
    assert np.all(np.diff(o.indptr) == 3)
    # reverse is an involution that swaps endpoints
    assert np.array_equal(o.reverse[o.reverse], np.arange(len(o.src)))
    assert np.array_equal(o.src[o.reverse], o.dst)
    assert np.array_equal(o.sign[o.reverse], -o.sign)


def test_edge_index():
    g = complete_graph(4)
    k, sign = g.edge_index(2, 1)
    assert g.edges[k].tolist() == [1, 2] and sign == -1
    assert g.edge_index(1, 2) == (k, 1)
    with pytest.raises(InvalidArgumentError):
        cycle(5).edge_index(0, 2)


def test_validate_reports_problems():
    two_triangles = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    d = validate(two_triangles)
    assert d.simple and d.regular
    assert not d.connected and d.components == 2 and not d.ok

    doubled = Graph.from_edges(3, [(0, 1), (0, 1), (1, 2), (0, 2)])
    assert not validate(doubled).simple

    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert not validate(path).regular


def test_swaps_keep_degree_and_connectivity():
    base = circulant(64, [1, 2])
    g = random_regular_by_swaps(base, 40, np.random.default_rng(1))
    d = validate(g)
    assert d.ok and g.degree == 4
    assert np.all(g.degrees() == 4)
    assert not np.array_equal(g.edges, base.edges)
    # same seed, same graph
    again = random_regular_by_swaps(base, 40, np.random.default_rng(1))
    assert np.array_equal(g.edges, again.edges)


def test_every_single_swap_keeps_degree_and_connectivity():
    # a sparse cycle rejects about half its proposals as disconnecting
    rng = np.random.default_rng(9)
    g = circulant(40, [1])
    changed = 0
    for _ in range(300):
        nxt = random_regular_by_swaps(g, 1, rng)
        h = nxt.to_networkx()
        assert nx.is_connected(h)
        assert sorted(d for _, d in h.degree()) == [2] * 40
        assert h.number_of_edges() == 40
        assert validate(nxt).ok
        changed += not np.array_equal(nxt.edges, g.edges)
        g = nxt
    assert changed > 0


def test_zero_swaps_returns_base():
    base = cycle(10)
    assert random_regular_by_swaps(base, 0, 3) is base


def test_swap_cap():
    # every swap on K4 makes a loop or a duplicate edge
    with pytest.raises(SwapError) as e:
        random_regular_by_swaps(complete_graph(4), 1, 0, retry_factor=5)
    assert e.value.accepted == 0
    assert e.value.proposed == 5
    assert e.value.rejected == 5


def test_random_regular():
    g = random_regular(128, 6, 7)
    assert g.n == 128 and g.degree == 6
    assert validate(g).ok


def test_edge_list_round_trip():
    g = hypercube(4)
    buf = StringIO()
    write_edge_list(g, buf)
    assert buf.getvalue().splitlines()[0] == "0 1"
    buf.seek(0)
    h = read_edge_list(buf)
    assert h.n == g.n and np.array_equal(h.edges, g.edges)


def test_family_registry():
    assert {"complete", "hypercube", "cycle", "circulant", "random_regular"} <= set(known_families())
    assert get_family("HyperCube") is get_family("hypercube")
    assert get_family("petersen") is None

    spec = GraphSpec.from_dict("random_regular:64:4")
    assert spec == GraphSpec("random_regular", 64, 4)
    assert spec.randomized and spec.label == "random_regular(64, 4)"
    a = spec.build(np.random.default_rng(5))
    b = spec.build(np.random.default_rng(5))
    assert np.array_equal(a.edges, b.edges)

    assert GraphSpec("hypercube", 4).build() is GraphSpec("hypercube", 4).build()
    with pytest.raises(InvalidArgumentError):
        GraphSpec("petersen", 10).build()
    with pytest.raises(InvalidArgumentError):
        GraphSpec("circulant", 10).build()
    with pytest.raises(InvalidArgumentError):
        GraphSpec.from_dict({"family": "cycle", "size": 5, "girth": 5})
