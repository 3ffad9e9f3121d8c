import subprocess

import numpy as np

from arrhenius.graphs import Graph, hypercube
from arrhenius.landscape import Landscape, sample_iid


def triangle() -> Graph:
    return Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)], name="triangle")


def single_edge() -> Graph:
    return Graph.from_edges(2, [(0, 1)], name="edge")


def landscape_on(graph: Graph, W, B=None, F=None) -> Landscape:
    return Landscape.from_arrays(graph, W, B, F)


def random_reversible(dim: int = 6, seed: int = 0, sigma_w: float = 1.0, sigma_b: float = 1.0) -> Landscape:
    """iid landscape on a hypercube with sigma_F = 0"""
    return sample_iid(hypercube(dim), sigma_w, sigma_b, 0.0, seed)


def align(x, y) -> float:
    """max |x - y| after removing the mean difference"""
    d = np.asarray(x) - np.asarray(y)
    return float(np.max(np.abs(d - d.mean())))


def run_cli_tool(toolname: str, args: list[str], cwd=None):
    return subprocess.run([toolname] + args, capture_output=True, text=True, check=False, cwd=cwd)
