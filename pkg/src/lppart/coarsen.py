"""Contract a partition into a coarse graph under "edge" or "node" semantics.

Both modes aggregate edge weights the same way: the weight between two coarse
nodes is the summed weight of all edges joining the two partitions, and
intra-partition edge mass is kept as a per-coarse-node self-loop weight so
that total edge mass is conserved exactly. The modes differ only in the value
attached to each coarse node: "edge" counts the nodes of the input graph in
the partition (one level back), "node" sums their node values (all the way
back to the original graph).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from lppart.graph import PartitionMap, WeightedGraph, _csr_from_canonical, write_edge_list

MODE_EDGE = "edge"
MODE_NODE = "node"


@dataclass
class CoarseGraph:
    """A coarse graph plus per-node self-loop mass and its source partition."""

    graph: WeightedGraph
    self_loop_weight: np.ndarray
    provenance: PartitionMap

    @classmethod
    def wrap(cls, g: WeightedGraph) -> "CoarseGraph":
        """View a plain graph as a coarse graph with no self-loop mass."""
        ident = PartitionMap(np.arange(g.node_count, dtype=np.int64), max(g.node_count, 1))
        return cls(g, np.zeros(g.node_count, dtype=np.float64), ident)


def coarsen(parts: PartitionMap, mode: str, g: WeightedGraph) -> CoarseGraph:
    """Contract each partition of ``g`` into one coarse node."""
    if mode not in (MODE_EDGE, MODE_NODE):
        raise ValueError(f"mode must be '{MODE_EDGE}' or '{MODE_NODE}', got {mode!r}")
    assign = parts.assignment
    if assign.shape != (g.node_count,):
        raise ValueError("partition map does not cover the graph")
    m = parts.num_parts

    if mode == MODE_EDGE:
        values = np.bincount(assign, minlength=m)
    else:
        values = np.bincount(assign, weights=g.node_values.astype(np.float64),
                             minlength=m).astype(np.int64)

    u, v, w = g.edge_array()
    pu = assign[u]
    pv = assign[v]
    intra = pu == pv
    self_loop = np.bincount(pu[intra], weights=w[intra], minlength=m)

    cu = np.minimum(pu[~intra], pv[~intra])
    cv = np.maximum(pu[~intra], pv[~intra])
    cw = w[~intra]
    if len(cu):
        key = cu * np.int64(m) + cv
        order = np.argsort(key, kind="stable")
        ks = key[order]
        starts = np.flatnonzero(np.concatenate(([True], ks[1:] != ks[:-1])))
        cw = np.add.reduceat(cw[order], starts)
        cu = cu[order[starts]]
        cv = cv[order[starts]]
    coarse = _csr_from_canonical(m, cu, cv, cw, node_values=values)
    return CoarseGraph(coarse, self_loop, parts)


def write_coarse_graph(cg: CoarseGraph, edges_dest: str | Path | IO,
                       values_dest: str | Path | IO) -> None:
    """Write the coarse edge list plus a ``id<TAB>value<TAB>self_loop`` table."""
    write_edge_list(cg.graph, edges_dest)
    lines = [f"{i}\t{int(val)}\t{float(sl)!r}\n"
             for i, (val, sl) in enumerate(zip(cg.graph.node_values, cg.self_loop_weight))]
    if isinstance(values_dest, (str, Path)):
        with open(values_dest, "w", encoding="utf-8", newline="") as fh:
            fh.writelines(lines)
    else:
        values_dest.writelines(lines)
