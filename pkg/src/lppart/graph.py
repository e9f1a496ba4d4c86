"""Undirected weighted graph in compressed neighbor-list form, plus edge-list I/O.

Graphs are immutable once built. Construction canonicalizes raw edges:
parallel edges are merged by summing their weights, self-loops are dropped,
and both directions of every undirected edge are stored in CSR-style arrays
sorted by (source, target). Every node carries an integer value (default 1)
recording how many original nodes it represents after coarsening.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

logger = logging.getLogger(__name__)

# pair keys (u * node_count + v) are packed into signed 64-bit integers
_MAX_NODES = 2**31


class GraphFormatError(ValueError):
    """Malformed or empty edge-list input."""


@dataclass
class IdMap:
    """Bijection between external 64-bit node ids and dense internal indices.

    ``external_ids[i]`` is the external id of internal node ``i``. For induced
    subgraphs the "external" side holds parent-graph indices.
    """

    external_ids: np.ndarray

    def __post_init__(self):
        self.external_ids = np.asarray(self.external_ids, dtype=np.int64)
        self._index_of = {int(e): i for i, e in enumerate(self.external_ids)}
        if len(self._index_of) != len(self.external_ids):
            raise ValueError("external ids are not unique")

    def __len__(self) -> int:
        return len(self.external_ids)

    def to_internal(self, external: int) -> int:
        try:
            return self._index_of[int(external)]
        except KeyError:
            raise KeyError(f"unknown external id {external}") from None

    def to_external(self, index: int) -> int:
        return int(self.external_ids[index])

    @classmethod
    def identity(cls, node_count: int) -> "IdMap":
        return cls(np.arange(node_count, dtype=np.int64))


@dataclass
class WeightedGraph:
    """Symmetric weighted graph over dense node indices ``[0, node_count)``.

    ``neighbor_offsets`` has length ``node_count + 1``; the arcs of node ``i``
    live at ``[neighbor_offsets[i], neighbor_offsets[i + 1])`` in
    ``neighbor_targets`` / ``edge_weights``. Every undirected edge is stored
    as two arcs with identical weight; self-loop arcs are never stored.
    """

    node_count: int
    neighbor_offsets: np.ndarray
    neighbor_targets: np.ndarray
    edge_weights: np.ndarray
    node_values: np.ndarray
    # ground-truth block of each node, set only by the planted-partition generator
    planted_blocks: np.ndarray | None = None

    @property
    def arc_count(self) -> int:
        return len(self.neighbor_targets)

    @property
    def edge_count(self) -> int:
        return self.arc_count // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.neighbor_offsets)

    def neighbors(self, i: int) -> np.ndarray:
        return self.neighbor_targets[self.neighbor_offsets[i]:self.neighbor_offsets[i + 1]]

    def neighbor_weights(self, i: int) -> np.ndarray:
        return self.edge_weights[self.neighbor_offsets[i]:self.neighbor_offsets[i + 1]]

    def arc_sources(self) -> np.ndarray:
        """Source index of every stored arc (parallel to neighbor_targets)."""
        return np.repeat(np.arange(self.node_count, dtype=np.int64), self.degrees)

    def total_edge_weight(self) -> float:
        return float(self.edge_weights.sum()) / 2.0

    def edge_array(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Canonical undirected edges as (u, v, w) arrays with u < v."""
        src = self.arc_sources()
        mask = src < self.neighbor_targets
        return src[mask], self.neighbor_targets[mask], self.edge_weights[mask]

    def with_node_values(self, values: np.ndarray) -> "WeightedGraph":
        """Same topology with replaced per-node values."""
        values = np.asarray(values, dtype=np.int64)
        if values.shape != (self.node_count,):
            raise ValueError("node value array has wrong length")
        if len(values) and values.min() < 1:
            raise ValueError("node values must be >= 1")
        return WeightedGraph(self.node_count, self.neighbor_offsets,
                             self.neighbor_targets, self.edge_weights, values)


@dataclass
class PartitionMap:
    """Total assignment of every node to one of ``num_parts`` subgraphs."""

    assignment: np.ndarray
    num_parts: int

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.num_parts < 1:
            raise ValueError("num_parts must be >= 1")
        if len(self.assignment):
            lo, hi = self.assignment.min(), self.assignment.max()
            if lo < 0 or hi >= self.num_parts:
                raise ValueError("partition ids out of range")

    def __len__(self) -> int:
        return len(self.assignment)

    def part_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.num_parts)


def _csr_from_canonical(node_count: int, u: np.ndarray, v: np.ndarray, w: np.ndarray,
                        node_values: np.ndarray | None = None,
                        planted_blocks: np.ndarray | None = None) -> WeightedGraph:
    """Build a graph from unique canonical edges (u < v, no duplicates)."""
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    ww = np.concatenate([w, w])
    order = np.argsort(src * np.int64(node_count) + dst, kind="stable")
    src, dst, ww = src[order], dst[order], ww[order]
    offsets = np.zeros(node_count + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=node_count), out=offsets[1:])
    if node_values is None:
        node_values = np.ones(node_count, dtype=np.int64)
    else:
        node_values = np.asarray(node_values, dtype=np.int64)
    return WeightedGraph(node_count, offsets, dst, ww, node_values, planted_blocks)


def from_edges(node_count: int, src, dst, weight=None, node_values=None,
               planted_blocks=None) -> WeightedGraph:
    """Build a graph from raw edge arrays.

    Edges may appear in any direction and any number of times; duplicates are
    merged by summing weights and self-loops are dropped.
    """
    if node_count < 0:
        raise ValueError("node_count must be non-negative")
    if node_count > _MAX_NODES:
        raise ValueError(f"node_count {node_count} exceeds supported maximum {_MAX_NODES}")
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if weight is None:
        weight = np.ones(len(src), dtype=np.float64)
    else:
        weight = np.asarray(weight, dtype=np.float64)
    if not (len(src) == len(dst) == len(weight)):
        raise ValueError("edge arrays must have equal length")
    if len(src):
        if src.min() < 0 or dst.min() < 0 or src.max() >= node_count or dst.max() >= node_count:
            raise ValueError("node index out of range")
        if not np.all(np.isfinite(weight)) or weight.min() <= 0:
            raise ValueError("edge weights must be finite and positive")

    u = np.minimum(src, dst)
    v = np.maximum(src, dst)
    keep = u != v
    u, v, w = u[keep], v[keep], weight[keep]

    if len(u):
        key = u * np.int64(node_count) + v
        order = np.argsort(key, kind="stable")
        ks = key[order]
        starts = np.flatnonzero(np.concatenate(([True], ks[1:] != ks[:-1])))
        w = np.add.reduceat(w[order], starts)
        u = u[order[starts]]
        v = v[order[starts]]
    return _csr_from_canonical(node_count, u, v, w, node_values, planted_blocks)


def validate_graph(g: WeightedGraph) -> None:
    """Check structural invariants; raises ValueError on the first violation."""
    off = g.neighbor_offsets
    if off.shape != (g.node_count + 1,) or off[0] != 0:
        raise ValueError("neighbor_offsets has wrong shape or start")
    if np.any(np.diff(off) < 0):
        raise ValueError("neighbor_offsets is not non-decreasing")
    if off[-1] != g.arc_count:
        raise ValueError("last offset does not equal arc count")
    if len(g.edge_weights) != g.arc_count:
        raise ValueError("edge_weights length mismatch")
    if g.node_values.shape != (g.node_count,):
        raise ValueError("node_values length mismatch")
    if g.node_count and len(g.node_values) and g.node_values.min() < 1:
        raise ValueError("node values must be >= 1")
    if g.arc_count == 0:
        return
    src = g.arc_sources()
    dst = g.neighbor_targets
    if dst.min() < 0 or dst.max() >= g.node_count:
        raise ValueError("neighbor target out of range")
    if np.any(src == dst):
        raise ValueError("self-loop arc stored in adjacency")
    if not np.all(np.isfinite(g.edge_weights)) or g.edge_weights.min() <= 0:
        raise ValueError("edge weights must be finite and positive")
    fwd = np.lexsort((dst, src))
    rev = np.lexsort((src, dst))
    if (not np.array_equal(src[fwd], dst[rev])
            or not np.array_equal(dst[fwd], src[rev])
            or not np.array_equal(g.edge_weights[fwd], g.edge_weights[rev])):
        raise ValueError("adjacency is not symmetric with identical weights")
    dup = (src[fwd][1:] == src[fwd][:-1]) & (dst[fwd][1:] == dst[fwd][:-1])
    if dup.any():
        raise ValueError("duplicate arcs stored in adjacency")


def load_edge_list(source: str | Path | IO, weighted: bool = True) -> tuple[WeightedGraph, IdMap]:
    """Parse an edge-list TSV into a graph plus an id map.

    Lines are ``src<TAB>dst[<TAB>weight]``; ``#``-prefixed lines are ignored.
    Parallel edges are merged by summing weights, self-loops are dropped with
    a counted warning, and the graph is symmetrized. With ``weighted=False``
    any weight column is ignored and every edge gets weight 1.0. Internal
    indices are assigned in first-appearance order.
    """
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

    index_of: dict[int, int] = {}
    ext_ids: list[int] = []
    srcs: list[int] = []
    dsts: list[int] = []
    wts: list[float] = []
    self_loops = 0

    for lineno, raw in enumerate(data.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise GraphFormatError(
                f"line {lineno}: expected 'src<TAB>dst[<TAB>weight]', got {len(fields)} field(s)")
        try:
            a = int(fields[0])
            b = int(fields[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: node ids must be integers") from None
        w = 1.0
        if len(fields) == 3:
            try:
                parsed = float(fields[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: edge weight is not a number") from None
            if not np.isfinite(parsed) or parsed <= 0:
                raise GraphFormatError(
                    f"line {lineno}: edge weight must be finite and positive, got {fields[2]}")
            if weighted:
                w = parsed
        for e in (a, b):
            if e not in index_of:
                index_of[e] = len(ext_ids)
                ext_ids.append(e)
        if a == b:
            self_loops += 1
            continue
        srcs.append(index_of[a])
        dsts.append(index_of[b])
        wts.append(w)

    if not ext_ids:
        raise GraphFormatError("empty input: no edges or nodes found")
    if self_loops:
        logger.warning("dropped %d self-loop edge(s) while loading", self_loops)
    g = from_edges(len(ext_ids), srcs, dsts, wts)
    return g, IdMap(np.asarray(ext_ids, dtype=np.int64))


def write_edge_list(g: WeightedGraph, dest: str | Path | IO, id_map: IdMap | None = None) -> None:
    """Write canonical undirected edges as ``src<TAB>dst<TAB>weight`` lines."""
    u, v, w = g.edge_array()
    ext = id_map.external_ids if id_map is not None else np.arange(g.node_count, dtype=np.int64)
    lines = [f"{ext[a]}\t{ext[b]}\t{float(ww)!r}\n" for a, b, ww in zip(u, v, w)]
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.writelines(lines)
    else:
        dest.writelines(lines)


def write_node_set(nodes, dest: str | Path | IO, id_map: IdMap | None = None) -> None:
    """Write a node set as one external id per line."""
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    ids = id_map.external_ids[nodes] if id_map is not None else nodes
    lines = [f"{i}\n" for i in ids]
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.writelines(lines)
    else:
        dest.writelines(lines)


def read_node_set(source: str | Path | IO) -> np.ndarray:
    """Read a one-id-per-line node set; returns sorted unique external ids."""
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
    ids = []
    for lineno, raw in enumerate(data.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            ids.append(int(line))
        except ValueError:
            raise GraphFormatError(f"line {lineno}: node id is not an integer") from None
    return np.unique(np.asarray(ids, dtype=np.int64))


def induced_subgraph(g: WeightedGraph, nodes) -> tuple[WeightedGraph, IdMap]:
    """Subgraph on a node subset, keeping exactly the edges internal to it.

    Returned subgraph indices are the subset in ascending parent order; the
    IdMap translates subgraph indices back to parent indices. Node values are
    copied from the parent.
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if len(nodes) and (nodes[0] < 0 or nodes[-1] >= g.node_count):
        raise ValueError("node index out of range")
    mark = np.full(g.node_count, -1, dtype=np.int64)
    mark[nodes] = np.arange(len(nodes), dtype=np.int64)
    src = g.arc_sources()
    dst = g.neighbor_targets
    keep = (src < dst) & (mark[src] >= 0) & (mark[dst] >= 0)
    sub = _csr_from_canonical(len(nodes), mark[src[keep]], mark[dst[keep]],
                              g.edge_weights[keep], node_values=g.node_values[nodes])
    return sub, IdMap(nodes)
