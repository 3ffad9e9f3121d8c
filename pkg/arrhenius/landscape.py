"""
Disordered energy landscapes on graphs.

A landscape carries well depths W per vertex, barriers B per undirected edge (B_ij = B_ji) and forces F per
undirected edge in the canonical u < v orientation (F_ji = -F_ij). The one-sided separable sampler may instead
record barriers per oriented edge, in which case the landscape is not reversible.

Gaussian draws follow one order: W over vertices ascending, then one draw per undirected edge for B, then one
per undirected edge for F. Draws are consumed even when the matching sigma is zero, so a seed gives the same
wells whatever the barrier and force scales are.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError
from .graphs import Graph
from .helper import Defaults, as_generator, segment_logsumexp, to_float_array, to_jsonable


@dataclass(frozen=True)
class SeparableSpec:
    """
    Barrier law B_ij = f(W_i) + eps_ij with eps_ij iid N(0, sigma^2) per vertex.

    f is affine, f(x) = slope * x + intercept.
    """

    slope: float = 0.0
    intercept: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidArgumentError(f"separable residual sigma must be > 0, got {self.sigma}")

    def f(self, x):
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class LandscapeMeta:
    mode: str = "custom"
    sigma_w: float = None
    sigma_b: float = None
    sigma_f: float = None
    lam: float = None
    f: dict = None
    symmetrize: bool = None
    seed: int = None


@dataclass(frozen=True, eq=False)
class Landscape:
    graph: Graph
    W: np.ndarray
    B: np.ndarray
    F: np.ndarray
    meta: LandscapeMeta = field(default_factory=LandscapeMeta)
    B_directed: np.ndarray = None

    def __post_init__(self):
        m = self.graph.num_edges
        if self.W.shape != (self.graph.n,) or self.B.shape != (m,) or self.F.shape != (m,):
            raise InvalidArgumentError(
                f"shape mismatch: W{self.W.shape}, B{self.B.shape}, F{self.F.shape} on {self.graph!r}"
            )
        if self.B_directed is not None and self.B_directed.shape != (2 * m,):
            raise InvalidArgumentError(f"directed barriers need shape ({2 * m},), got {self.B_directed.shape}")
        for name in ("W", "B", "F", "B_directed"):
            values = getattr(self, name)
            if values is not None:
                if not np.all(np.isfinite(values)):
                    raise InvalidArgumentError(f"{name} has non-finite entries")
                values.flags.writeable = False

    @classmethod
    def from_arrays(cls, graph: Graph, W, B=None, F=None, meta: LandscapeMeta = None) -> Landscape:
        m = graph.num_edges
        return cls(
            graph=graph,
            W=to_float_array(W),
            B=np.zeros(m) if B is None else to_float_array(B),
            F=np.zeros(m) if F is None else to_float_array(F),
            meta=meta or LandscapeMeta(),
        )

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def symmetric(self) -> bool:
        return self.B_directed is None

    @property
    def forced(self) -> bool:
        return bool(np.any(self.F != 0))

    @property
    def reversible(self) -> bool:
        return self.symmetric and not self.forced

    def barrier_out(self) -> np.ndarray:
        """B per oriented edge, in graph.oriented order."""
        if self.B_directed is not None:
            return self.B_directed
        return self.B[self.graph.oriented.edge_id]

    def force_out(self) -> np.ndarray:
        """F per oriented edge, in graph.oriented order; the non-canonical orientation reads negated."""
        o = self.graph.oriented
        return self.F[o.edge_id] * o.sign

    def barrier(self, i: int, j: int) -> float:
        k, _ = self.graph.edge_index(i, j)
        if self.B_directed is not None:
            o = self.graph.oriented
            lo, hi = o.indptr[i], o.indptr[i + 1]
            return float(self.B_directed[lo + int(np.searchsorted(o.dst[lo:hi], j))])
        return float(self.B[k])

    def force(self, i: int, j: int) -> float:
        k, sign = self.graph.edge_index(i, j)
        return float(sign * self.F[k])

    def shifted(self, c: float) -> Landscape:
        """The same landscape with c added to every well depth."""
        return Landscape(self.graph, self.W + c, self.B.copy(), self.F.copy(), self.meta, self.B_directed)

    # --------------------------- canonical serialization ---------------------
    def to_dict(self) -> dict:
        out = {
            "n": self.graph.n,
            "degree": self.graph.degree,
            "edges": self.graph.edges,
            "W": self.W,
            "B": self.B,
            "F": self.F,
            "meta": asdict(self.meta),
        }
        if self.B_directed is not None:
            out["B_directed"] = self.B_directed
        return to_jsonable(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict, graph: Graph = None) -> Landscape:
        graph = graph or Graph.from_edges(data["n"], data["edges"], name="landscape graph")
        directed = data.get("B_directed")
        return cls(
            graph=graph,
            W=to_float_array(data["W"]),
            B=to_float_array(data["B"]),
            F=to_float_array(data["F"]),
            meta=LandscapeMeta(**data.get("meta", {})),
            B_directed=None if directed is None else to_float_array(directed),
        )

    @classmethod
    def from_json(cls, text: str, graph: Graph = None) -> Landscape:
        return cls.from_dict(json.loads(text), graph)


# ------------------------------- Samplers -------------------------------------
def _check_sigma(name, value, strict=False):
    if value is None or not np.isfinite(value) or value < 0 or (strict and value == 0):
        bound = "> 0" if strict else ">= 0"
        raise InvalidArgumentError(f"{name} must be {bound}, got {value}")


def sample_iid(graph: Graph, sigma_w: float, sigma_b: float = 0.0, sigma_f: float = 0.0, rng=None) -> Landscape:
    """iid N(0, sigma_w^2) wells, one N(0, sigma_b^2) barrier and one N(0, sigma_f^2) force per edge."""
    _check_sigma("sigma_w", sigma_w, strict=True)
    _check_sigma("sigma_b", sigma_b)
    _check_sigma("sigma_f", sigma_f)
    rng, seed = as_generator(rng)
    m = graph.num_edges
    W = sigma_w * rng.standard_normal(graph.n)
    z_b = rng.standard_normal(m)
    z_f = rng.standard_normal(m)
    B = sigma_b * z_b if sigma_b > 0 else np.zeros(m)
    F = sigma_f * z_f if sigma_f > 0 else np.zeros(m)
    meta = LandscapeMeta(mode="iid", sigma_w=sigma_w, sigma_b=sigma_b, sigma_f=sigma_f, seed=seed)
    return Landscape(graph, W, B, F, meta)


def sample_rem(graph: Graph, lam: float, sigma_w: float, rng=None) -> Landscape:
    """
    Random energy model dynamics: B_ij = (1 - lam)(W_i + W_j), no forces.

    The induced rates are exp(lam * W_i - (1 - lam) * W_j).
    """
    if lam is None or not 0 <= lam <= 1:
        raise InvalidArgumentError(f"lambda must lie in [0, 1], got {lam}")
    _check_sigma("sigma_w", sigma_w, strict=True)
    rng, seed = as_generator(rng)
    W = sigma_w * rng.standard_normal(graph.n)
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    B = (1 - lam) * (W[u] + W[v])
    sigma_b = float(np.sqrt(2) * (1 - lam) * sigma_w)
    meta = LandscapeMeta(mode="rem", sigma_w=sigma_w, sigma_b=sigma_b, sigma_f=0.0, lam=lam, seed=seed)
    return Landscape(graph, W, B, np.zeros(graph.num_edges), meta)


def sample_separable(
    graph: Graph, sigma_w: float, spec: SeparableSpec, rng=None, *, symmetrize: bool = False
) -> Landscape:
    """
    One-sided separable barriers B_ij = f(W_i) + eps_ij, residuals drawn per oriented edge in graph.oriented order.

    With symmetrize=True the two orientations are averaged into one symmetric barrier per edge; the averaged
    barriers no longer have exactly the per-vertex residual law.
    """
    _check_sigma("sigma_w", sigma_w, strict=True)
    rng, seed = as_generator(rng)
    o = graph.oriented
    W = sigma_w * rng.standard_normal(graph.n)
    directed = spec.f(W[o.src]) + spec.sigma * rng.standard_normal(len(o.src))
    meta = LandscapeMeta(
        mode="separable",
        sigma_w=sigma_w,
        sigma_b=spec.sigma,
        sigma_f=0.0,
        f=asdict(spec),
        symmetrize=symmetrize,
        seed=seed,
    )
    m = graph.num_edges
    if symmetrize:
        B = np.zeros(m)
        np.add.at(B, o.edge_id, 0.5 * directed)
        return Landscape(graph, W, B, np.zeros(m), meta)
    return Landscape(graph, W, np.zeros(m), np.zeros(m), meta, B_directed=directed)


def exit_rate_degeneracy_check(landscape: Landscape, rtol: float = Defaults.EXIT_RATE_RTOL) -> bool:
    """True iff the induced exit rates are not all equal within relative tolerance rtol."""
    o = landscape.graph.oriented
    log_rates = landscape.W[o.src] - landscape.barrier_out() + landscape.force_out()
    log_q = segment_logsumexp(log_rates, o.indptr)
    return bool(np.ptp(log_q) > np.log1p(rtol))
