"""Regular adjacency graphs: complete, hypercube, cycle, circulant and edge-swap random regular graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache, reduce
from typing import NamedTuple, TextIO

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import GraphError, InvalidArgumentError, SwapError
from .helper import Defaults, as_generator, indent_str, logger


class OrientedEdges(NamedTuple):
    """
    Both orientations of every edge, sorted by (src, dst).

    indptr is the CSR row pointer over src; edge_id points back into Graph.edges and sign is +1 when the
    orientation is canonical (src < dst), -1 otherwise. reverse[k] is the position of the opposite orientation.
    """

    src: np.ndarray
    dst: np.ndarray
    edge_id: np.ndarray
    sign: np.ndarray
    indptr: np.ndarray
    reverse: np.ndarray


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Simple undirected graph on vertices 0..n-1.

    @ivar edges:
        (m, 2) int64 array of unordered pairs stored once as u < v, sorted lexicographically. Read-only.
    @ivar degree:
        The common vertex degree; for hand-built irregular graphs, the largest degree.
    """

    n: int
    edges: np.ndarray
    degree: int
    name: str = "graph"

    @classmethod
    def from_edges(cls, n: int, pairs, name: str = "graph") -> Graph:
        """Canonicalize pairs to u < v and sort them. Duplicates and loops are kept so validate can see them."""
        edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        edges = np.sort(edges, axis=1)
        edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
        edges.flags.writeable = False
        counts = np.bincount(edges.ravel(), minlength=n) if len(edges) else np.zeros(n, dtype=np.int64)
        return cls(n=int(n), edges=edges, degree=int(counts.max()) if n else 0, name=name)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def oriented(self) -> OrientedEdges:
        u, v = self.edges[:, 0], self.edges[:, 1]
        m = len(u)
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        edge_id = np.concatenate([np.arange(m), np.arange(m)])
        sign = np.concatenate([np.ones(m), -np.ones(m)])
        order = np.lexsort((dst, src))
        position = np.empty(2 * m, dtype=np.int64)
        position[order] = np.arange(2 * m)
        # the opposite orientation of raw slot k is slot (k + m) mod 2m
        reverse = position[(order + m) % (2 * m)]
        indptr = np.concatenate([[0], np.cumsum(np.bincount(src, minlength=self.n))])
        return OrientedEdges(src[order], dst[order], edge_id[order], sign[order], indptr, reverse)

    def neighbors(self, i: int) -> np.ndarray:
        o = self.oriented
        return o.dst[o.indptr[i] : o.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.oriented.indptr)

    def edge_index(self, i: int, j: int) -> tuple[int, int]:
        """Position of edge {i, j} in self.edges and the sign of the (i, j) orientation."""
        u, v = (i, j) if i < j else (j, i)
        keys = self.edges[:, 0] * self.n + self.edges[:, 1]
        k = int(np.searchsorted(keys, u * self.n + v))
        if k >= len(keys) or keys[k] != u * self.n + v:
            raise InvalidArgumentError(f"({i}, {j}) is not an edge", context=self.name)
        return k, 1 if i < j else -1

    def adjacency(self) -> csr_matrix:
        o = self.oriented
        return csr_matrix((np.ones(len(o.src)), (o.src, o.dst)), shape=(self.n, self.n))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(map(tuple, self.edges.tolist()))
        return g

    def __repr__(self):
        return f"<Graph {self.name}: n={self.n}, m={self.num_edges}, degree={self.degree}>"


@dataclass(frozen=True)
class GraphDiagnostics:
    n: int
    num_edges: int
    degree: int
    simple: bool
    regular: bool
    connected: bool
    components: int

    @property
    def ok(self) -> bool:
        return self.simple and self.regular and self.connected

    def pretty_print(self, level=0, tabwidth=3):
        pad = indent_str(level=level, tabwidth=tabwidth)
        for key in ("n", "num_edges", "degree", "simple", "regular", "connected", "components"):
            print(f"{pad}{key}: {getattr(self, key)}")


def validate(g: Graph) -> GraphDiagnostics:
    """Report simple/regular/connected for g. Never mutates."""
    edges = g.edges
    loops = bool(np.any(edges[:, 0] == edges[:, 1])) if len(edges) else False
    duplicates = bool(np.any(np.all(edges[1:] == edges[:-1], axis=1))) if len(edges) > 1 else False
    counts = np.bincount(edges.ravel(), minlength=g.n) if len(edges) else np.zeros(g.n, dtype=np.int64)
    regular = bool(g.n > 0 and np.all(counts == g.degree))
    if g.n == 0:
        components = 0
    else:
        adjacency = csr_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(g.n, g.n))
        components = int(connected_components(adjacency, directed=False)[0])
    return GraphDiagnostics(
        n=g.n,
        num_edges=len(edges),
        degree=g.degree,
        simple=not (loops or duplicates),
        regular=regular,
        connected=components == 1,
        components=components,
    )


# ------------------------------- Constructors ---------------------------------
def complete_graph(n: int) -> Graph:
    if n < 2:
        raise InvalidArgumentError(f"complete graph needs n >= 2, got {n}")
    u, v = np.triu_indices(n, k=1)
    return Graph.from_edges(n, np.column_stack([u, v]), name=f"complete({n})")


def hypercube(dim: int) -> Graph:
    """Vertices are the bit strings of length dim; edges join labels at Hamming distance 1."""
    if dim < 1:
        raise InvalidArgumentError(f"hypercube needs dim >= 1, got {dim}")
    if dim > Defaults.INDEX_BITS:
        raise InvalidArgumentError(f"hypercube({dim}) overflows the {Defaults.INDEX_BITS}-bit vertex index")
    n = 1 << dim
    labels = np.arange(n, dtype=np.int64)
    pairs = []
    for bit in range(dim):
        low = labels[(labels >> bit) & 1 == 0]
        pairs.append(np.column_stack([low, low | (1 << bit)]))
    return Graph.from_edges(n, np.concatenate(pairs), name=f"hypercube({dim})")


def circulant(n: int, offsets) -> Graph:
    """Vertex i is adjacent to i +- s mod n for every offset s."""
    offsets = [int(s) for s in offsets]
    if not offsets:
        raise InvalidArgumentError("circulant needs at least one offset")
    if len(set(offsets)) != len(offsets):
        raise InvalidArgumentError(f"duplicate circulant offsets {offsets}")
    if n < 2 or any(s < 1 or 2 * s > n for s in offsets):
        raise InvalidArgumentError(f"circulant offsets must lie in [1, n/2], got {offsets} for n={n}")
    gcd = reduce(math.gcd, offsets, n)
    if gcd != 1:
        raise GraphError(
            f"circulant({n}, {offsets}) is disconnected: gcd of offsets and n is {gcd}, giving {gcd} components",
            context="circulant",
            diagnostics={"gcd": gcd, "components": gcd},
        )
    labels = np.arange(n, dtype=np.int64)
    pairs = np.concatenate([np.column_stack([labels, (labels + s) % n]) for s in sorted(offsets)])
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)  # the n/2 chord appears twice
    degree = 2 * len(offsets) - (1 if 2 * max(offsets) == n else 0)
    g = Graph.from_edges(n, pairs, name=f"circulant({n}, {sorted(offsets)})")
    if g.degree != degree:
        raise GraphError(f"expected degree {degree}, built {g.degree}", context=g.name)
    return g


def cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidArgumentError(f"cycle needs n >= 3, got {n}")
    g = circulant(n, [1])
    return Graph(n=g.n, edges=g.edges, degree=g.degree, name=f"cycle({n})")


def regular_offsets(n: int, degree: int) -> list[int]:
    """Circulant offsets realizing the given degree; odd degree uses the n/2 chord and needs n even."""
    if degree < 1 or degree >= n:
        raise InvalidArgumentError(f"degree must lie in [1, n-1], got {degree} for n={n}")
    if degree % 2 == 0:
        return list(range(1, degree // 2 + 1))
    if n % 2:
        raise InvalidArgumentError(f"odd degree {degree} needs an even number of vertices, got n={n}")
    return list(range(1, degree // 2 + 1)) + [n // 2]


# ------------------------------- Edge swaps -----------------------------------
@dataclass
class SwapStats:
    accepted: int = 0
    proposed: int = 0
    rejected_loop: int = 0
    rejected_duplicate: int = 0
    rejected_disconnect: int = 0

    @property
    def rejected(self) -> int:
        return self.rejected_loop + self.rejected_duplicate + self.rejected_disconnect


def random_regular_by_swaps(base: Graph, num_swap_pairs: int, rng=None, *, retry_factor: int = None) -> Graph:
    """
    Randomize base by accepted double-edge swaps (a, b), (c, d) -> (a, c), (b, d).

    Both edges are redrawn whenever a proposal would create a loop, a duplicate edge or a disconnected graph;
    rejected proposals do not count. Raises SwapError once proposals exceed retry_factor * num_swap_pairs.
    """
    if num_swap_pairs < 0:
        raise InvalidArgumentError(f"num_swap_pairs must be >= 0, got {num_swap_pairs}")
    if num_swap_pairs == 0:
        return base
    if base.num_edges < 2:
        raise InvalidArgumentError("edge swaps need at least two edges", context=base.name)
    rng, _ = as_generator(rng)
    cap = (retry_factor or Defaults.SWAP_RETRY_FACTOR) * num_swap_pairs

    working = base.to_networkx()
    edge_list = [tuple(e) for e in base.edges.tolist()]
    stats = SwapStats()
    m = len(edge_list)
    while stats.accepted < num_swap_pairs:
        if stats.proposed >= cap:
            raise SwapError(
                f"only {stats.accepted} of {num_swap_pairs} swaps accepted after {stats.proposed} proposals "
                f"(loop={stats.rejected_loop}, duplicate={stats.rejected_duplicate}, "
                f"disconnect={stats.rejected_disconnect})",
                accepted=stats.accepted,
                proposed=stats.proposed,
                rejected=stats.rejected,
            )
        stats.proposed += 1
        k1, k2 = rng.integers(m, size=2)
        if k1 == k2:
            stats.rejected_duplicate += 1
            continue
        a, b = edge_list[k1]
        c, d = edge_list[k2]
        if rng.random() < 0.5:
            c, d = d, c
        if a == c or b == d:
            stats.rejected_loop += 1
            continue
        if working.has_edge(a, c) or working.has_edge(b, d):
            stats.rejected_duplicate += 1
            continue
        working.remove_edges_from([(a, b), (c, d)])
        working.add_edges_from([(a, c), (b, d)])
        # old paths through (a, b) and (c, d) reroute iff both pairs stay joined
        if not (nx.has_path(working, a, b) and nx.has_path(working, c, d)):
            working.remove_edges_from([(a, c), (b, d)])
            working.add_edges_from([(a, b), (c, d)])
            stats.rejected_disconnect += 1
            continue
        edge_list[k1] = (a, c)
        edge_list[k2] = (b, d)
        stats.accepted += 1

    logger.debug(f"{base.name}: {stats.accepted} swaps accepted, {stats.rejected} rejected")
    g = Graph.from_edges(base.n, edge_list, name=f"swapped({base.name}, {num_swap_pairs})")
    return Graph(n=g.n, edges=g.edges, degree=base.degree, name=g.name)


def random_regular(n: int, degree: int, rng=None, swap_factor: int = None) -> Graph:
    """Circulant base of the requested degree randomized by swap_factor * degree accepted swaps."""
    base = circulant(n, regular_offsets(n, degree))
    return random_regular_by_swaps(base, (swap_factor or Defaults.SWAP_FACTOR) * degree, rng)


# ------------------------------- Edge lists -----------------------------------
def write_edge_list(g: Graph, buf: TextIO) -> None:
    """One 'u v' line per edge, u < v, lexicographic order."""
    for u, v in g.edges.tolist():
        buf.write(f"{u} {v}\n")


def read_edge_list(buf: TextIO, n: int = None, name: str = "edge list") -> Graph:
    pairs = [tuple(int(x) for x in line.split()) for line in buf if line.strip()]
    if n is None:
        n = 1 + max(max(p) for p in pairs) if pairs else 0
    return Graph.from_edges(n, pairs, name=name)


# ------------------------------- Family registry ------------------------------
@dataclass(frozen=True)
class GraphSpec:
    """
    A named graph family plus its size parameters.

    size is the vertex count, except for the hypercube where it is the dimension. degree selects the
    circulant offsets [1..degree/2] (plus n/2 for odd degree) for the circulant and random_regular families.
    """

    family: str
    size: int
    degree: int = None
    swap_factor: int = Defaults.SWAP_FACTOR

    @property
    def randomized(self) -> bool:
        return self.family == "random_regular"

    @property
    def label(self) -> str:
        if self.degree is None:
            return f"{self.family}({self.size})"
        return f"{self.family}({self.size}, {self.degree})"

    @classmethod
    def from_dict(cls, data: dict) -> GraphSpec:
        if isinstance(data, str):
            # "hypercube:10" or "random_regular:1024:8"
            family, *params = data.split(":")
            data = dict(zip(("size", "degree", "swap_factor"), map(int, params)), family=family)
        unknown = set(data) - {"family", "size", "degree", "swap_factor"}
        if unknown:
            raise InvalidArgumentError(f"unknown graph keys {sorted(unknown)}")
        if "family" not in data or "size" not in data:
            raise InvalidArgumentError(f"a graph needs a family and a size, got {data}")
        return cls(
            family=str(data["family"]).lower(),
            size=int(data["size"]),
            degree=None if data.get("degree") is None else int(data["degree"]),
            swap_factor=int(data.get("swap_factor", Defaults.SWAP_FACTOR)),
        )

    def key(self) -> dict:
        key = {"family": self.family, "size": self.size}
        if self.degree is not None:
            key["degree"] = self.degree
        if self.randomized:
            key["swap_factor"] = self.swap_factor
        return key

    def build(self, rng=None) -> Graph:
        builder = get_family(self.family)
        if builder is None:
            raise InvalidArgumentError(f"unknown graph family {self.family!r}; known: {known_families()}")
        if self.randomized:
            return builder(self, rng)
        return _build_cached(self)


@lru_cache(maxsize=32)
def _build_cached(spec: GraphSpec) -> Graph:
    return get_family(spec.family)(spec, None)


__family_registry = {}


def register_family(name, builder):
    """Register builder(spec, rng) -> Graph under name."""
    __family_registry[name.lower()] = builder


def get_family(name):
    """Return the builder registered under name, or None."""
    return __family_registry.get(name.lower())


def known_families() -> list:
    return sorted(__family_registry)


def _need_degree(spec: GraphSpec) -> int:
    if spec.degree is None:
        raise InvalidArgumentError(f"the {spec.family} family needs a degree")
    return spec.degree


register_family("complete", lambda spec, rng: complete_graph(spec.size))
register_family("hypercube", lambda spec, rng: hypercube(spec.size))
register_family("cycle", lambda spec, rng: cycle(spec.size))
register_family("circulant", lambda spec, rng: circulant(spec.size, regular_offsets(spec.size, _need_degree(spec))))
register_family(
    "random_regular", lambda spec, rng: random_regular(spec.size, _need_degree(spec), rng, spec.swap_factor)
)
