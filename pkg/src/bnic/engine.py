"""Incremental recompilation of a compiled model under structural edits.

A batch of modifications is processed in two phases.  Phase one applies each
edit to the dag, patches the moral graph, and marks the MPS clusters whose
internal structure may have changed.  Phase two rebuilds each connected
marked subtree from its induced moral subgraph and splices the fresh
junction / MPS subtrees into the existing trees, leaving every unmarked
cluster untouched.

Throughout, the engine maintains the refinement invariant between the two
trees: each MPS aggregates a connected set of junction clusters, and every
MPS-tree edge corresponds to exactly one junction edge crossing the two
clique groups with the same separator.  That invariant is what makes
boundary separators complete and the splice well defined; violations raise
:class:`~bnic.errors.InconsistencyError` rather than being repaired.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .clustertree import ClusterTree
from .errors import InconsistencyError, InvalidEditError, UnknownVariableError
from .graph import Dag, Link, UndirectedGraph
from .mpd import MpdIndex, aggregate_cliques
from .pipeline import Triangulation, construct_join_tree, perfect_elimination_order


# ---------------------------------------------------------------------------
# Modifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AddNode:
    name: str


@dataclass(frozen=True)
class RemoveNode:
    node: int


@dataclass(frozen=True)
class AddArc:
    parent: int
    child: int


@dataclass(frozen=True)
class RemoveArc:
    parent: int
    child: int


Modification = AddNode | RemoveNode | AddArc | RemoveArc


def describe(mod: Modification, dag: Dag) -> str:
    match mod:
        case AddNode(name):
            return f"add-node {name}"
        case RemoveNode(node):
            return f"remove-node {dag.table.name(node)}"
        case AddArc(parent, child):
            return f"add-arc {dag.table.name(parent)} {dag.table.name(child)}"
        case RemoveArc(parent, child):
            return f"remove-arc {dag.table.name(parent)} {dag.table.name(child)}"
    raise TypeError(f"unknown modification {mod!r}")


def apply_modification(dag: Dag, mod: Modification) -> int | None:
    """Apply a structural edit to a dag alone; returns the new id for AddNode."""
    match mod:
        case AddNode(name):
            return dag.add_node(name)
        case RemoveNode(node):
            dag.remove_node(node)
        case AddArc(parent, child):
            dag.add_arc(parent, child)
        case RemoveArc(parent, child):
            dag.remove_arc(parent, child)
        case _:
            raise TypeError(f"unknown modification {mod!r}")
    return None


def expand_remove_node(dag: Dag, node: int) -> list[Modification]:
    """A user-level node deletion as arc removals followed by the node removal.

    Incident arcs are listed in insertion order (parent arcs first), so the
    expansion is reproducible.
    """
    mods: list[Modification] = [RemoveArc(p, node) for p in dag.parents(node)]
    mods += [RemoveArc(node, c) for c in dag.children(node)]
    mods.append(RemoveNode(node))
    return mods


# ---------------------------------------------------------------------------
# The compiled model and traces
# ---------------------------------------------------------------------------


class CompiledModel:
    """The mutually consistent bundle of structures kept up to date by edits.

    ``jt.family`` aliases ``index.clique_of`` and ``mpd.family`` aliases
    ``index.mps_of``: there is a single source of truth for family hosting.
    The triangulation record is derived from the clusters on demand and
    cached; edits invalidate the cache.
    """

    def __init__(
        self,
        dag: Dag,
        moral: UndirectedGraph,
        jt: ClusterTree,
        mpd: ClusterTree,
        index: MpdIndex,
        tri: Triangulation | None = None,
    ):
        self.dag = dag
        self.moral = moral
        self.jt = jt
        self.mpd = mpd
        self.index = index
        self._tri = tri
        jt.family = index.clique_of
        mpd.family = index.mps_of

    @property
    def tri(self) -> Triangulation:
        if self._tri is None:
            self._tri = derive_triangulation(self.moral, self.jt)
        return self._tri

    def copy(self) -> "CompiledModel":
        dag = self.dag.copy()
        moral = self.moral.copy()
        jt = self.jt.copy()
        mpd = self.mpd.copy()
        index = self.index.copy()
        tri = None
        if self._tri is not None:
            tri = Triangulation(moral, self._tri.order, self._tri.fill)
        return CompiledModel(dag, moral, jt, mpd, index, tri)

    def triangulated(self) -> UndirectedGraph:
        return self.tri.graph()


@dataclass
class ModTrace:
    """What one modification did during the marking phase."""

    mod: Modification
    description: str
    links: list[Link] = field(default_factory=list)
    touched: dict[int, frozenset[int]] = field(default_factory=dict)
    rewired: list[dict] = field(default_factory=list)

    def marked_sets(self) -> set[frozenset[int]]:
        return set(self.touched.values())


@dataclass
class SubtreeTrace:
    """One connected marked subtree rebuilt during the splice phase."""

    mps_ids: tuple[int, ...]
    variables: frozenset[int]
    new_cliques: tuple[frozenset[int], ...]
    new_mps: tuple[frozenset[int], ...]


@dataclass
class BatchTrace:
    """Record of a whole incremental-compilation batch."""

    mods: list[ModTrace] = field(default_factory=list)
    subtrees: list[SubtreeTrace] = field(default_factory=list)
    absorbed: list[tuple[frozenset[int], frozenset[int]]] = field(default_factory=list)
    new_jt_ids: set[int] = field(default_factory=set)
    new_mpd_ids: set[int] = field(default_factory=set)

    def marked_ids(self) -> set[int]:
        out: set[int] = set()
        for rec in self.mods:
            out |= set(rec.touched)
        return out


def _mark(tree: ClusterTree, cid: int, rec: ModTrace | None) -> None:
    tree.mark(cid)
    if rec is not None:
        rec.touched[cid] = tree.cluster(cid)


# ---------------------------------------------------------------------------
# Phase one: moral-graph maintenance and marking
# ---------------------------------------------------------------------------


def modify_moral_graph(model: CompiledModel, mod: Modification) -> list[Link]:
    """Patch the moral graph after the dag already reflects the edit.

    Returns the list of moral links added or deleted.  All membership tests
    run against the invariant: {u, v} is a moral edge iff u and v are joined
    by an arc or share a child in the updated dag.
    """
    dag, moral = model.dag, model.moral
    match mod:
        case AddNode(name):
            moral.add_vertex(dag.table.id(name))
            return []
        case RemoveNode(node):
            if moral.neighbors(node):
                raise InvalidEditError(f"node {node} still has moral edges")
            moral.remove_vertex(node)
            return []
        case AddArc(parent, child):
            links = [Link(parent, child, True)]
            if not moral.has_edge(parent, child):
                moral.add_edge(parent, child)
            fam = sorted(dag.family(child))
            for i, u in enumerate(fam):
                for v in fam[i + 1 :]:
                    if not moral.has_edge(u, v):
                        moral.add_edge(u, v)
                        link = Link(u, v, True)
                        if link not in links:
                            links.append(link)
            return links
        case RemoveArc(parent, child):
            candidates = [(parent, child)]
            candidates += [(parent, z) for z in dag.parents(child) if z != parent]
            links = []
            for u, v in candidates:
                if moral.has_edge(u, v) and not dag.moral_condition(u, v):
                    moral.remove_edge(u, v)
                    links.append(Link(u, v, False))
            return links
    raise TypeError(f"unknown modification {mod!r}")


def mark_remove_link(
    model: CompiledModel,
    links: Sequence[Link],
    m_y: int,
    m_z: int | None = None,
    rec: ModTrace | None = None,
) -> None:
    """Mark the MPSs invalidated by deleted moral links.

    Starts at the host of the removed arc's child and spreads across every
    separator containing both endpoints of some deleted link.  In batch mode
    the host can be stale (an earlier edit may have grown the family without
    a rebuild yet), so on the top-level call any cluster still containing a
    deleted pair that the walk missed seeds a further walk; every cluster
    holding a dead pair must be rebuilt or its boundary separators could
    stay incomplete.
    """
    deleted = [l.pair for l in links if not l.added]
    _remove_link_walk(model, deleted, m_y, m_z, rec)
    if m_z is None:
        mpd = model.mpd
        for pair in deleted:
            for host in mpd.cluster_ids():
                if pair <= mpd.cluster(host) and not mpd.is_marked(host):
                    _remove_link_walk(model, deleted, host, None, rec)


def _remove_link_walk(
    model: CompiledModel,
    deleted: list[frozenset[int]],
    m_y: int,
    m_z: int | None,
    rec: ModTrace | None,
) -> None:
    mpd = model.mpd
    _mark(mpd, m_y, rec)
    for m_k in mpd.neighbors(m_y):
        if m_k == m_z:
            continue
        sep = mpd.separator(m_y, m_k)
        if any(pair <= sep for pair in deleted):
            _remove_link_walk(model, deleted, m_k, m_y, rec)


def mark_remove_node(
    model: CompiledModel,
    x: int,
    m_x: int,
    m_y: int | None = None,
    rec: ModTrace | None = None,
) -> None:
    """Strip an isolated variable out of every cluster and separator hosting it.

    Walks the MPS subtree containing x (separators containing x guide the
    recursion), marking the visited clusters; on return from the top-level
    call the junction tree is swept the same way.
    """
    mpd = model.mpd
    mpd.replace_cluster(m_x, mpd.cluster(m_x) - {x})
    _mark(mpd, m_x, rec)
    for m_z in mpd.neighbors(m_x):
        if m_z == m_y:
            continue
        sep = mpd.separator(m_x, m_z)
        if x in sep:
            mpd.set_separator(m_x, m_z, sep - {x})
            mark_remove_node(model, x, m_z, m_x, rec)
    if m_y is None:
        _strip_variable(model.jt, x)


def _strip_variable(tree: ClusterTree, x: int) -> None:
    for cid in tree.cluster_ids():
        vs = tree.cluster(cid)
        if x in vs:
            tree.replace_cluster(cid, vs - {x})
    for a, b, sep in tree.edges():
        if x in sep:
            tree.set_separator(a, b, sep - {x})


def add_node(model: CompiledModel, x: int, rec: ModTrace | None = None) -> None:
    """Host a brand-new isolated variable in singleton clusters of both trees.

    The clusters attach by empty separators: the clique to the lowest-id
    existing clique, the MPS to that clique's owner (keeping the two trees'
    edges mirrored).  The MPS is marked for rebuild.
    """
    jt, mpd, index = model.jt, model.mpd, model.index
    anchor = min(jt.cluster_ids()) if len(jt) else None
    c = jt.add_cluster({x})
    m = mpd.add_cluster({x}, marked=True)
    if anchor is not None:
        jt.add_edge(c, anchor, frozenset())
        mpd.add_edge(m, index.owner(anchor), frozenset())
    index.cliques_of[m] = {c}
    index.clique_of[x] = c
    index.mps_of[x] = m
    if rec is not None:
        rec.touched[m] = mpd.cluster(m)


def mark_add_link(
    model: CompiledModel,
    parent: int,
    child: int,
    links: Sequence[Link],
    rec: ModTrace | None = None,
) -> None:
    """Mark the MPS path that must host a new arc and its induced moral links.

    For each link the nearest MPS containing the new parent is located from
    the child's family host; if an empty separator lies on the path between
    them it is deleted and the two MPSs are joined directly by an artificial
    separator {parent}, shrinking the region to re-triangulate.
    """
    mpd, jt, index = model.mpd, model.jt, model.index
    m_y = index.mps_of[child]
    for _link in links:
        m_x = _nearest_containing(mpd, m_y, parent)
        path = mpd.path(m_x, m_y)
        if path is None:
            raise InconsistencyError("MPS tree is disconnected")
        # an empty separator between two already-marked clusters must stay:
        # deleting it would sever a pending rebuild obligation (marks are
        # rebuilt together only while they stay connected)
        empty = [
            (path[i], path[i + 1])
            for i in range(len(path) - 1)
            if not mpd.separator(path[i], path[i + 1])
            and not (mpd.is_marked(path[i]) and mpd.is_marked(path[i + 1]))
        ]
        if empty:
            a, b = empty[0]
            ca, cb = _crossing_edge(model, a, b)
            mpd.remove_edge(a, b)
            jt.remove_edge(ca, cb)
            sep = frozenset({parent})
            mpd.add_edge(m_x, m_y, sep)
            cx = min(c for c in index.cliques_of[m_x] if parent in jt.cluster(c))
            cy = min(index.cliques_of[m_y])
            jt.add_edge(cx, cy, sep)
            if rec is not None:
                rec.rewired.append(
                    {"removed": (a, b), "added": (m_x, m_y), "separator": sep}
                )
            path = [m_x, m_y]
        for m in path:
            _mark(mpd, m, rec)


def _nearest_containing(tree: ClusterTree, start: int, x: int) -> int:
    """The cluster containing x closest to start (ties: lowest id)."""
    if x in tree.cluster(start):
        return start
    seen = {start}
    frontier = [start]
    while frontier:
        found = []
        nxt = []
        for c in frontier:
            for nb in tree.neighbors(c):
                if nb in seen:
                    continue
                seen.add(nb)
                nxt.append(nb)
                if x in tree.cluster(nb):
                    found.append(nb)
        if found:
            return min(found)
        frontier = nxt
    raise InconsistencyError(f"no cluster contains variable {x}")


def _crossing_edge(model: CompiledModel, m_a: int, m_b: int) -> tuple[int, int]:
    """The unique junction edge between the clique groups of two adjacent MPSs."""
    ga = model.index.cliques_of[m_a]
    gb = model.index.cliques_of[m_b]
    found = None
    for c in sorted(ga):
        for nb in model.jt.neighbors(c):
            if nb in gb:
                if found is not None:
                    raise InconsistencyError(
                        f"multiple junction edges cross MPS edge ({m_a}, {m_b})"
                    )
                found = (c, nb)
    if found is None:
        raise InconsistencyError(f"MPS edge ({m_a}, {m_b}) has no junction counterpart")
    return found


# ---------------------------------------------------------------------------
# Phase two: rebuild and splice
# ---------------------------------------------------------------------------


def _best_attachment(
    tree: ClusterTree, candidates: Iterable[int], sep: frozenset[int], ck: frozenset[int]
) -> int | None:
    """The replacement cluster covering sep with maximal overlap with ck.

    Ties go to the smaller cluster, then the lower id.
    """
    best = None
    for cid in sorted(candidates):
        vs = tree.cluster(cid)
        if sep <= vs:
            key = (-len(vs & ck), len(vs), cid)
            if best is None or key < best[0]:
                best = (key, cid)
    return None if best is None else best[1]


def connect(
    tree: ClusterTree,
    replacement_ids: set[int],
    c_i: int,
    c_j: int | None = None,
) -> tuple[list[tuple[int, int, frozenset[int], int]], set[int]]:
    """Reattach the boundary of the marked subtree around c_i to new clusters.

    Walks marked clusters starting from c_i, avoiding the caller c_j.  Every
    separator S leading to an unmarked neighbour C_k is re-hung onto the
    replacement cluster chosen by :func:`_best_attachment`; a record where
    the chosen cluster equals S flags a later amalgamation.  Returns the
    reattachment records and the set of marked clusters visited.
    """
    records: list[tuple[int, int, frozenset[int], int]] = []
    visited: set[int] = set()

    def walk(ci: int, cj: int | None) -> None:
        visited.add(ci)
        for ck in tree.neighbors(ci):
            if ck == cj:
                continue
            if tree.is_marked(ck):
                if ck not in visited:
                    walk(ck, ci)
            else:
                sep = tree.separator(ci, ck)
                target = _best_attachment(tree, replacement_ids, sep, tree.cluster(ck))
                if target is None:
                    raise InconsistencyError(
                        f"no replacement cluster covers boundary separator {sorted(sep)}"
                    )
                tree.add_edge(target, ck, sep)
                records.append((ci, ck, sep, target))

    walk(c_i, c_j)
    return records, visited


def absorb_non_maximal(tree: ClusterTree, on_merge=None) -> ClusterTree:
    """Merge every cluster contained in an adjacent neighbour into it.

    Scans in ascending id order and restarts after each merge; on_merge is
    called with (src, dst) before each contraction.  Returns the tree.
    """
    changed = True
    while changed:
        changed = False
        for cid in tree.cluster_ids():
            for nb in tree.neighbors(cid):
                if tree.cluster(cid) <= tree.cluster(nb):
                    if on_merge is not None:
                        on_merge(cid, nb)
                    tree.merge_into(cid, nb)
                    changed = True
                    break
            if changed:
                break
    return tree


def _mirror_clique_merge(model: CompiledModel, src: int, dst: int, trace: BatchTrace | None) -> None:
    """Index and MPS-tree bookkeeping for merging junction cluster src into dst."""
    index = model.index
    owner = index.owner_map()
    m_src, m_dst = owner[src], owner[dst]
    if trace is not None:
        trace.absorbed.append((model.jt.cluster(src), model.jt.cluster(dst)))
    if m_src == m_dst:
        index.cliques_of[m_src].discard(src)
        return
    # A cluster swallowed by a neighbour of another MPS is a complete
    # separator, hence always a singleton MPS; the merge mirrors 1:1.
    if index.cliques_of[m_src] != {src}:
        raise InconsistencyError(
            f"absorbed cluster {src} is not the only clique of its MPS {m_src}"
        )
    if not model.mpd.has_edge(m_src, m_dst):
        raise InconsistencyError(f"MPSs {m_src} and {m_dst} are not adjacent")
    model.mpd.merge_into(m_src, m_dst)
    del index.cliques_of[m_src]


def _amalgamate(model: CompiledModel, src: int, dst: int, trace: BatchTrace | None) -> None:
    if src not in model.jt:
        return
    _mirror_clique_merge(model, src, dst, trace)
    model.jt.merge_into(src, dst)


def _rebuild_subtree(model: CompiledModel, comp: list[int], trace: BatchTrace | None) -> None:
    jt, mpd, index = model.jt, model.mpd, model.index
    variables: set[int] = set()
    for m in comp:
        variables |= mpd.cluster(m)
    doomed = sorted(set().union(*(index.cliques_of[m] for m in comp)))
    for k in doomed:
        jt.mark(k)

    old_boundary = sorted(
        (m, nb, mpd.separator(m, nb))
        for m in comp
        for nb in mpd.neighbors(m)
        if nb not in comp
    )

    if not variables:
        # every cluster of the subtree was emptied by node removals: the
        # boundary separators are necessarily empty, so drop the clusters
        # and leave reconnection to the end-of-batch fragment rejoin
        if any(sep for _, _, sep in old_boundary):
            raise InconsistencyError("emptied subtree has a non-empty boundary separator")
        for k in doomed:
            jt.remove_cluster(k)
        for m in comp:
            mpd.remove_cluster(m)
            del index.cliques_of[m]
        if trace is not None:
            trace.subtrees.append(SubtreeTrace(tuple(comp), frozenset(), (), ()))
        return

    g_sub = model.moral.induced(variables)
    t, _tri = construct_join_tree(g_sub)
    t_mpd, t_index = aggregate_cliques(t, g_sub)

    jt_map = {lid: jt.add_cluster(t.cluster(lid)) for lid in t.cluster_ids()}
    for a, b, sep in t.edges():
        jt.add_edge(jt_map[a], jt_map[b], sep)
    mpd_map = {lid: mpd.add_cluster(t_mpd.cluster(lid)) for lid in t_mpd.cluster_ids()}
    for a, b, sep in t_mpd.edges():
        mpd.add_edge(mpd_map[a], mpd_map[b], sep)
    for m_local, cliques in t_index.cliques_of.items():
        index.cliques_of[mpd_map[m_local]] = {jt_map[c] for c in cliques}
    owner_global = {jt_map[c]: mpd_map[m] for c, m in t_index.owner_map().items()}
    new_clique_ids = set(jt_map.values())
    if trace is not None:
        trace.new_jt_ids |= new_clique_ids
        trace.new_mpd_ids |= set(mpd_map.values())
        trace.subtrees.append(
            SubtreeTrace(
                tuple(comp),
                frozenset(variables),
                tuple(t.cluster(l) for l in t.cluster_ids()),
                tuple(t_mpd.cluster(l) for l in t_mpd.cluster_ids()),
            )
        )

    records, visited = connect(jt, new_clique_ids, doomed[0], None)
    if visited != set(doomed):
        raise InconsistencyError(
            "marked cliques do not form one connected junction subtree"
        )

    # mirror each junction reattachment as an MPS-tree edge; the boundary
    # must match the old MPS boundary one-to-one
    owner_old = index.owner_map()
    mirrored = Counter()
    for _k, c_k, sep, target in records:
        m_out = owner_old[c_k]
        mpd.add_edge(owner_global[target], m_out, sep)
        mirrored[(m_out, sep)] += 1
    if mirrored != Counter((nb, sep) for _, nb, sep in old_boundary):
        raise InconsistencyError("junction and MPS boundaries disagree")

    for k in doomed:
        jt.remove_cluster(k)
    for m in comp:
        mpd.remove_cluster(m)
        del index.cliques_of[m]

    # re-host families whose clique died; their families always sit inside
    # the rebuilt region
    dead = set(doomed)
    for var, host in sorted(index.clique_of.items()):
        if host in dead:
            fam = model.dag.family(var)
            best = None
            for cid in sorted(new_clique_ids):
                vs = jt.cluster(cid)
                if fam <= vs and (best is None or (len(vs), cid) < best):
                    best = (len(vs), cid)
            if best is None:
                raise InconsistencyError(
                    f"family of variable {var} not covered by the rebuilt subtree"
                )
            index.clique_of[var] = best[1]
            index.mps_of[var] = owner_global[best[1]]

    for _k, c_k, sep, target in records:
        if target in jt and jt.cluster(target) == sep:
            _amalgamate(model, target, c_k, trace)


def _rejoin_fragments(model: CompiledModel) -> None:
    comps = sorted(model.jt.components(), key=min)
    if len(comps) <= 1:
        return
    owner = model.index.owner_map()
    anchor = min(comps[0])
    for comp in comps[1:]:
        other = min(comp)
        model.jt.add_edge(anchor, other, frozenset())
        model.mpd.add_edge(owner[anchor], owner[other], frozenset())


def _marked_components(mpd: ClusterTree, marked: set[int]) -> list[list[int]]:
    comps: list[list[int]] = []
    seen: set[int] = set()
    for start in sorted(marked):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            c = stack.pop()
            for nb in mpd.neighbors(c):
                if nb in marked and nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        seen |= comp
        comps.append(sorted(comp))
    return comps


def derive_triangulation(moral: UndirectedGraph, jt: ClusterTree) -> Triangulation:
    """The triangulation record implied by a junction tree over a moral graph.

    The triangulated graph is the union of the cluster completions; the fill
    is its edge surplus over the moral graph, and the order is a perfect
    elimination order of the union (which must be chordal).
    """
    gt = moral.copy()
    for cid in jt.cluster_ids():
        vs = sorted(jt.cluster(cid))
        for i, u in enumerate(vs):
            for v in vs[i + 1 :]:
                if not gt.has_edge(u, v):
                    gt.add_edge(u, v)
    fill = frozenset(gt.edge_set() - moral.edge_set())
    order = perfect_elimination_order(gt)
    return Triangulation(moral, order, fill)


def _validate_modification(model: CompiledModel, mod: Modification) -> None:
    dag = model.dag
    match mod:
        case AddNode(name):
            if not isinstance(name, str) or not name:
                raise InvalidEditError("add-node needs a non-empty name")
            if dag.table.has_name(name):
                raise InvalidEditError(f"variable name already in use: {name!r}")
        case RemoveNode(node):
            if node not in dag.table:
                raise UnknownVariableError(f"unknown variable id {node}")
            if dag.parents(node) or dag.children(node):
                raise InvalidEditError(
                    f"remove-node requires an isolated node, {dag.table.name(node)!r} has arcs"
                )
        case AddArc(parent, child):
            for v in (parent, child):
                if v not in dag.table:
                    raise UnknownVariableError(f"unknown variable id {v}")
            if parent == child:
                raise InvalidEditError("add-arc endpoints must differ")
            if dag.has_arc(parent, child):
                raise InvalidEditError("duplicate arc")
        case RemoveArc(parent, child):
            if not dag.has_arc(parent, child):
                raise InvalidEditError(f"no such arc {parent} -> {child}")
        case _:
            raise TypeError(f"unknown modification {mod!r}")


def incremental_compile(
    model: CompiledModel,
    mods: Sequence[Modification],
    trace: BatchTrace | None = None,
) -> CompiledModel:
    """Re-establish the compiled structures after a batch of edits.

    The model is updated in place (and returned); unmarked clusters survive
    with identical vertex sets.  Invalid modifications raise before any
    marking happens for them; internal inconsistencies raise
    InconsistencyError and are never silently repaired.
    """
    for mod in mods:
        _validate_modification(model, mod)
        rec = ModTrace(mod=mod, description=describe(mod, model.dag))
        apply_modification(model.dag, mod)
        links = modify_moral_graph(model, mod)
        rec.links = list(links)
        match mod:
            case AddNode(name):
                add_node(model, model.dag.table.id(name), rec)
            case RemoveNode(node):
                m_x = model.index.mps_of[node]
                mark_remove_node(model, node, m_x, None, rec)
                model.index.mps_of.pop(node, None)
                model.index.clique_of.pop(node, None)
            case RemoveArc(_, child):
                mark_remove_link(model, links, model.index.mps_of[child], None, rec)
            case AddArc(parent, child):
                mark_add_link(model, parent, child, links, rec)
        if trace is not None:
            trace.mods.append(rec)

    marked = set(model.mpd.marked_ids())
    if marked:
        for comp in _marked_components(model.mpd, marked):
            _rebuild_subtree(model, comp, trace)
        absorb_non_maximal(
            model.jt, on_merge=lambda s, d: _mirror_clique_merge(model, s, d, trace)
        )
        _rejoin_fragments(model)
        if model.mpd.marked_ids() or model.jt.marked_ids():
            raise InconsistencyError("marks survived the rebuild phase")
        if not (model.jt.is_tree() and model.mpd.is_tree()):
            raise InconsistencyError("rebuild left a disconnected cluster structure")
    model._tri = None
    return model
