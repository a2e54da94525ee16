"""Aggregation of junction-tree cliques into maximal prime subgraphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

from .clustertree import ClusterTree
from .graph import UndirectedGraph


@dataclass
class MpdIndex:
    """Bookkeeping tying the MPS tree to the junction tree.

    ``cliques_of`` partitions the junction clusters among the MPS clusters;
    each MPS vertex set equals the union of its cliques.  ``clique_of`` and
    ``mps_of`` record the hosting clique and MPS of every variable's family.
    """

    cliques_of: dict[int, set[int]] = field(default_factory=dict)
    mps_of: dict[int, int] = field(default_factory=dict)
    clique_of: dict[int, int] = field(default_factory=dict)

    def owner(self, clique_id: int) -> int:
        for mps, cliques in self.cliques_of.items():
            if clique_id in cliques:
                return mps
        raise KeyError(f"clique {clique_id} belongs to no MPS")

    def owner_map(self) -> dict[int, int]:
        return {c: m for m, cs in self.cliques_of.items() for c in cs}

    def copy(self) -> "MpdIndex":
        return MpdIndex(
            cliques_of={m: set(cs) for m, cs in self.cliques_of.items()},
            mps_of=dict(self.mps_of),
            clique_of=dict(self.clique_of),
        )


def aggregate_cliques(
    jt: ClusterTree, gm: UndirectedGraph, rng: Random | None = None
) -> tuple[ClusterTree, MpdIndex]:
    """Merge adjacent clusters across separators incomplete in the moral graph.

    The scan runs over edges in ascending id-pair order and restarts after
    every merge; the merged cluster keeps the smaller id.  The resulting
    cluster multiset is independent of merge order (pass rng to randomise
    the order, used by the shuffle-order tests).  Requires a junction tree
    built from a minimal triangulation of gm.
    """
    mpd = jt.copy()
    mpd.clear_marks()
    groups: dict[int, set[int]] = {cid: {cid} for cid in mpd.cluster_ids()}
    while True:
        incomplete = [
            (a, b) for a, b, sep in mpd.edges() if not gm.is_complete(sep)
        ]
        if not incomplete:
            break
        a, b = incomplete[0] if rng is None else rng.choice(incomplete)
        keep, gone = (a, b) if a < b else (b, a)
        merged = mpd.cluster(keep) | mpd.cluster(gone)
        groups[keep] |= groups.pop(gone)
        mpd.merge_into(gone, keep)
        mpd.replace_cluster(keep, merged)

    index = MpdIndex(cliques_of=groups, clique_of=dict(jt.family))
    owner = index.owner_map()
    index.mps_of = {v: owner[c] for v, c in index.clique_of.items()}
    mpd.family = index.mps_of
    return mpd, index
