"""Subgraph augmentation plumbing: PageRank pruning and feature aggregation.

PageRank here deliberately ignores edge weights (scores divide by plain
out-degree); it ranks structural influence, and the lowest-ranked slice of
nodes is dropped before a subgraph is handed to downstream training. Feature
helpers build the per-partition global feature table and concatenate it back
onto per-node features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from lppart.graph import PartitionMap, WeightedGraph, induced_subgraph, _csr_from_canonical


@dataclass(frozen=True)
class PagerankParams:
    alpha: float = 0.85
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")


@dataclass
class FeatureTable:
    """Dense per-row feature matrix of fixed dimension."""

    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise ValueError("feature rows must form a 2-d matrix")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("feature values must be finite")

    @property
    def dimension(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]


def pagerank(g: WeightedGraph, params: PagerankParams = PagerankParams()) -> np.ndarray:
    """Power-iteration PageRank with uniform teleport; scores sum to 1.

    Mass on isolated nodes is redistributed uniformly. Iteration stops once
    the L1 residual drops below ``tol`` or after ``max_iter`` rounds.
    """
    n = g.node_count
    if n == 0:
        raise ValueError("pagerank of an empty graph is undefined")
    deg = g.degrees
    src = g.arc_sources()
    dst = g.neighbor_targets
    dangling = deg == 0
    alpha = params.alpha
    pr = np.full(n, 1.0 / n)
    for _ in range(params.max_iter):
        share = np.zeros(n)
        if g.arc_count:
            share = np.bincount(dst, weights=pr[src] / deg[src], minlength=n)
        loose = pr[dangling].sum()
        nxt = (1.0 - alpha) / n + alpha * (share + loose / n)
        if np.abs(nxt - pr).sum() < params.tol:
            pr = nxt
            break
        pr = nxt
    return pr


def lowest_pagerank_nodes(g: WeightedGraph, fraction: float,
                          params: PagerankParams = PagerankParams()) -> np.ndarray:
    """Indices of the ``ceil(fraction * |V|)`` lowest-scoring nodes.

    Ordering is a stable ascending sort on (score, index), so equal scores
    are resolved by index.
    """
    if not (0.0 <= fraction < 1.0):
        raise ValueError("fraction must lie in [0, 1)")
    count = math.ceil(fraction * g.node_count)
    if count == 0:
        return np.empty(0, dtype=np.int64)
    scores = pagerank(g, params)
    order = np.argsort(scores, kind="stable")
    return np.sort(order[:count])


def refine_structure(g: WeightedGraph, fraction: float = 0.05, mode: str = "nodes",
                     params: PagerankParams = PagerankParams()) -> WeightedGraph:
    """Drop the least influential slice of the graph.

    ``nodes`` mode removes the lowest-PageRank ``ceil(fraction * |V|)`` nodes
    with their incident edges; ``edges`` mode removes the
    ``ceil(fraction * |E|)`` lightest edges (ties by endpoint pair order).
    """
    if not (0.0 <= fraction < 1.0):
        raise ValueError("fraction must lie in [0, 1)")
    if mode == "nodes":
        doomed = lowest_pagerank_nodes(g, fraction, params)
        keep = np.setdiff1d(np.arange(g.node_count, dtype=np.int64), doomed)
        sub, _ = induced_subgraph(g, keep)
        return sub
    if mode == "edges":
        u, v, w = g.edge_array()
        count = math.ceil(fraction * len(u))
        if count == 0:
            return g
        order = np.lexsort((v, u, w))
        keep = np.sort(order[count:])
        return _csr_from_canonical(g.node_count, u[keep], v[keep], w[keep],
                                   node_values=g.node_values)
    raise ValueError(f"mode must be 'nodes' or 'edges', got {mode!r}")


def aggregate_features(g: WeightedGraph, parts: PartitionMap, feats: FeatureTable,
                       op: str = "mean") -> FeatureTable:
    """Aggregate member rows into one row per part (mean by default)."""
    if len(feats) != g.node_count:
        raise ValueError("feature table does not cover the graph")
    if op not in ("mean", "sum"):
        raise ValueError(f"op must be 'mean' or 'sum', got {op!r}")
    k = parts.num_parts
    out = np.zeros((k, feats.dimension))
    np.add.at(out, parts.assignment, feats.rows)
    if op == "mean":
        sizes = parts.part_sizes().astype(np.float64)
        sizes[sizes == 0] = 1.0
        out /= sizes[:, None]
    return FeatureTable(out)


def concat_global(feats: FeatureTable, global_feats: FeatureTable,
                  parts: PartitionMap) -> FeatureTable:
    """Append each node's part-level global row to its own feature row."""
    if len(feats) != len(parts):
        raise ValueError("feature table does not cover the partition map")
    if len(global_feats) != parts.num_parts:
        raise ValueError("global feature table must have one row per part")
    joined = np.concatenate([feats.rows, global_feats.rows[parts.assignment]], axis=1)
    return FeatureTable(joined)


def write_feature_table(table: FeatureTable, dest: str | Path | IO,
                        ids: np.ndarray | None = None) -> None:
    """Write ``id<TAB>f1...<TAB>fF`` rows under a ``#dim F`` header."""
    if ids is None:
        ids = np.arange(len(table), dtype=np.int64)
    lines = [f"#dim {table.dimension}\n"]
    for i, row in zip(ids, table.rows):
        lines.append(f"{i}\t" + "\t".join(repr(float(x)) for x in row) + "\n")
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.writelines(lines)
    else:
        dest.writelines(lines)


def read_feature_table(source: str | Path | IO) -> tuple[FeatureTable, np.ndarray]:
    """Read a feature TSV; returns the table plus the id column."""
    close = False
    if isinstance(source, (str, Path)):
        fh = open(source, "rb")
        close = True
    else:
        fh = source
    try:
        data = fh.read()
    finally:
        if close:
            fh.close()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    dim = None
    ids: list[int] = []
    rows: list[list[float]] = []
    for lineno, raw in enumerate(data.split("\n"), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if len(fields) == 2 and fields[0] == "dim":
                dim = int(fields[1])
            continue
        fields = line.split("\t")
        try:
            ids.append(int(fields[0]))
            rows.append([float(x) for x in fields[1:]])
        except ValueError:
            raise ValueError(f"line {lineno}: malformed feature row") from None
        if dim is not None and len(rows[-1]) != dim:
            raise ValueError(f"line {lineno}: expected {dim} feature value(s)")
    if not rows:
        raise ValueError("empty feature table")
    return FeatureTable(np.asarray(rows)), np.asarray(ids, dtype=np.int64)
