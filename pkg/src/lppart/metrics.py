"""Partition quality metrics and a spectral sanity check.

Edge-cut and balance are unweighted edge counts: cut edges belong to no part,
so the maximum load counts intra-partition edges only (this makes balance
collapse toward zero as the cut ratio approaches one, which is the intended
reading). The size deviation uses the sample convention with divisor k - 1
around the ideal mean |V| / k.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from lppart.graph import PartitionMap, WeightedGraph

logger = logging.getLogger(__name__)

_DENSE_LIMIT = 2048


@dataclass
class PartitionReport:
    edge_cut_ratio: float
    bal: float
    std: float
    per_part_nodes: list[int]
    per_part_intra_edges: list[int]
    wall_times_ms: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "edge_cut_ratio": self.edge_cut_ratio,
            "bal": self.bal,
            "std": self.std,
            "per_part_nodes": self.per_part_nodes,
            "per_part_intra_edges": self.per_part_intra_edges,
            "wall_times_ms": self.wall_times_ms,
        }, indent=2)


def _cross_mask(g: WeightedGraph, parts: PartitionMap) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    u, v, _ = g.edge_array()
    return u, v, parts.assignment[u] != parts.assignment[v]


def edge_cut(g: WeightedGraph, parts: PartitionMap) -> float:
    """Fraction of undirected edges with endpoints in different parts."""
    if g.edge_count == 0:
        logger.warning("edge_cut of an edgeless graph defined as 0")
        return 0.0
    _, _, cross = _cross_mask(g, parts)
    return float(cross.sum()) / g.edge_count


def intra_edge_counts(g: WeightedGraph, parts: PartitionMap, k: int) -> np.ndarray:
    """Number of intra-partition edges per part."""
    u, _, cross = _cross_mask(g, parts)
    return np.bincount(parts.assignment[u][~cross], minlength=k)


def balance(g: WeightedGraph, parts: PartitionMap, k: int) -> float:
    """Max per-part intra-edge count over the ideal average load |E| / k."""
    if g.edge_count == 0:
        raise ValueError("balance is undefined for an edgeless graph")
    max_load = int(intra_edge_counts(g, parts, k).max())
    return max_load / (g.edge_count / k)


def std_dev(parts: PartitionMap, k: int) -> float:
    """Sample-style deviation of part node counts around |V| / k."""
    if k < 2:
        raise ValueError("std_dev needs k >= 2")
    counts = np.bincount(parts.assignment, minlength=k).astype(np.float64)
    mu = len(parts.assignment) / k
    return float(np.sqrt(np.square(counts - mu).sum() / (k - 1)))


def build_report(g: WeightedGraph, parts: PartitionMap, k: int,
                 wall_times_ms: dict[str, float] | None = None) -> PartitionReport:
    nodes = np.bincount(parts.assignment, minlength=k)
    intra = intra_edge_counts(g, parts, k)
    bal = balance(g, parts, k) if g.edge_count else 0.0
    std = std_dev(parts, k) if k >= 2 else 0.0
    return PartitionReport(
        edge_cut_ratio=edge_cut(g, parts),
        bal=bal,
        std=std,
        per_part_nodes=[int(x) for x in nodes],
        per_part_intra_edges=[int(x) for x in intra],
        wall_times_ms=dict(wall_times_ms or {}),
    )


def _dense_adjacency(g: WeightedGraph) -> np.ndarray:
    a = np.zeros((g.node_count, g.node_count))
    src = g.arc_sources()
    a[src, g.neighbor_targets] = g.edge_weights
    return a


def estimate_spectral_norm(a: np.ndarray, seed: int = 0, iters: int = 500,
                           tol: float = 1e-12) -> float:
    """Power-iteration estimate of the spectral norm of a symmetric matrix."""
    n = a.shape[0]
    if n == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = a @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - est) <= tol * max(1.0, norm):
            return norm
        est = norm
    return est


@dataclass
class SpectralCheckReport:
    passed: bool
    trials: int
    failures: int
    full_norm: float
    max_ratio: float


def spectral_submatrix_check(g: WeightedGraph, trials: int, seed: int) -> SpectralCheckReport:
    """Check that random principal submatrices never beat the full spectral norm.

    The full weighted adjacency norm is estimated by power iteration; each
    trial draws a random node subset of size >= 2 and requires the submatrix
    norm to stay within ``full + 1e-6``.
    """
    if g.node_count > _DENSE_LIMIT:
        raise ValueError(f"graph too large for dense spectral check (> {_DENSE_LIMIT} nodes)")
    if g.node_count < 2:
        raise ValueError("spectral check needs at least 2 nodes")
    a = _dense_adjacency(g)
    full = estimate_spectral_norm(a, seed=seed)
    rng = np.random.default_rng(seed)
    failures = 0
    max_ratio = 0.0
    for _ in range(trials):
        size = int(rng.integers(2, g.node_count + 1))
        subset = np.sort(rng.choice(g.node_count, size=size, replace=False))
        sub_norm = estimate_spectral_norm(a[np.ix_(subset, subset)], seed=seed)
        if full > 0:
            max_ratio = max(max_ratio, sub_norm / full)
        if sub_norm > full + 1e-6:
            failures += 1
    return SpectralCheckReport(failures == 0, trials, failures, full, max_ratio)
