"""From-scratch recompilation and independent validity checks.

Everything here re-derives structure from the dag alone, so the checks stay
independent of the incremental engine's bookkeeping.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from random import Random

from .clustertree import ClusterTree
from .engine import (
    AddArc,
    AddNode,
    CompiledModel,
    Modification,
    RemoveArc,
    apply_modification,
    expand_remove_node,
)
from .graph import Dag, is_chordal, moralize
from .mpd import aggregate_cliques
from .pipeline import Triangulation, construct_join_tree, extract_cliques


def full_recompile(dag: Dag) -> CompiledModel:
    """Compile the whole model from scratch; deterministic for a fixed dag."""
    gm = moralize(dag)
    jt, tri = construct_join_tree(gm, dag)
    mpd, index = aggregate_cliques(jt, gm)
    return CompiledModel(dag, gm, jt, mpd, index, Triangulation(gm, tri.order, tri.fill))


# ---------------------------------------------------------------------------
# Validity report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidityReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> str | None:
        for c in self.checks:
            if not c.passed:
                return c.name
        return None

    def __str__(self) -> str:
        lines = [
            f"  {'PASS' if c.passed else 'FAIL'}  {c.name}" + (f": {c.detail}" if c.detail and not c.passed else "")
            for c in self.checks
        ]
        verdict = "valid" if self.passed else f"INVALID (first failure: {self.first_failure})"
        return "\n".join(lines + [f"  => model is {verdict}"])


def _connected_within(tree: ClusterTree, ids: list[int]) -> bool:
    if len(ids) <= 1:
        return True
    members = set(ids)
    seen = {ids[0]}
    stack = [ids[0]]
    while stack:
        c = stack.pop()
        for nb in tree.neighbors(c):
            if nb in members and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return seen == members


def validate(model: CompiledModel) -> ValidityReport:
    """Run every structural check against independently re-derived facts."""
    checks: list[Check] = []
    dag, moral, jt, mpd, index, tri = (
        model.dag,
        model.moral,
        model.jt,
        model.mpd,
        model.index,
        model.tri,
    )

    expected_moral = moralize(dag)
    checks.append(
        Check(
            "moral_graph",
            moral == expected_moral,
            "stored moral graph differs from moralize(dag)",
        )
    )

    gt = tri.graph()
    chordal, witness = is_chordal(gt)
    checks.append(
        Check("triangulation_chordal", chordal, f"missing chord at {witness}")
    )

    minimal = chordal
    offender = None
    if chordal:
        for pair in sorted(tri.fill, key=sorted):
            u, v = sorted(pair)
            probe = gt.copy()
            probe.remove_edge(u, v)
            if is_chordal(probe)[0]:
                minimal = False
                offender = (u, v)
                break
    checks.append(
        Check("triangulation_minimal", minimal, f"fill edge {offender} is redundant")
    )

    rip = jt.is_tree() and jt.vertices() == set(dag.nodes())
    if rip:
        for v in dag.nodes():
            if not _connected_within(jt, jt.clusters_containing(v)):
                rip = False
                offender = v
                break
    checks.append(
        Check("running_intersection", rip, f"violated for variable {offender}")
    )

    sep_ok = all(sep == jt.cluster(a) & jt.cluster(b) for a, b, sep in jt.edges())
    checks.append(
        Check("separator_intersection", sep_ok, "a junction separator is not the endpoint intersection")
    )

    complete_ok = all(gt.is_complete(jt.cluster(c)) for c in jt.cluster_ids())
    checks.append(
        Check("cluster_completeness", complete_ok, "a cluster is incomplete in the triangulated graph")
    )

    maximal_ok = True
    if chordal:
        maximal_ok = Counter(extract_cliques(gt)) == jt.cluster_multiset()
    checks.append(
        Check(
            "cluster_maximality",
            maximal_ok,
            "clusters are not exactly the maximal cliques of the triangulated graph",
        )
    )

    fam_ok = set(index.clique_of) == set(dag.nodes()) and set(index.mps_of) == set(dag.nodes())
    if fam_ok:
        for v in dag.nodes():
            fam = dag.family(v)
            if not (
                index.clique_of[v] in jt
                and index.mps_of[v] in mpd
                and fam <= jt.cluster(index.clique_of[v])
                and fam <= mpd.cluster(index.mps_of[v])
            ):
                fam_ok = False
                offender = v
                break
    checks.append(Check("family_coverage", fam_ok, f"family of {offender} is not hosted"))

    mpd_sep_ok = mpd.is_tree() and all(
        moral.is_complete(sep) for _, _, sep in mpd.edges()
    )
    checks.append(
        Check("mpd_separators", mpd_sep_ok, "an MPS separator is incomplete in the moral graph")
    )

    mpd_multiset_ok = False
    if chordal and rip:
        reference, _ = aggregate_cliques(jt, moral)
        mpd_multiset_ok = (
            reference.cluster_multiset() == mpd.cluster_multiset()
            and reference.separator_multiset() == mpd.separator_multiset()
        )
    checks.append(
        Check(
            "mpd_multiset",
            mpd_multiset_ok,
            "MPS clusters/separators differ from re-aggregating the junction tree",
        )
    )

    idx_ok = sorted(c for cs in index.cliques_of.values() for c in cs) == jt.cluster_ids()
    idx_ok = idx_ok and set(index.cliques_of) == set(mpd.cluster_ids())
    if idx_ok:
        for m, cs in index.cliques_of.items():
            union = frozenset().union(*(jt.cluster(c) for c in cs)) if cs else frozenset()
            if union != mpd.cluster(m) or not _connected_within(jt, sorted(cs)):
                idx_ok = False
                break
    if idx_ok:
        owner = index.owner_map()
        idx_ok = all(index.mps_of[v] == owner[index.clique_of[v]] for v in index.clique_of)
    checks.append(
        Check("mpd_index", idx_ok, "clique/MPS index is inconsistent with the trees")
    )

    return ValidityReport(tuple(checks))


def mpd_equal(a: ClusterTree, b: ClusterTree) -> bool:
    """Decomposition equality: cluster and separator vertex-set multisets match."""
    return (
        a.cluster_multiset() == b.cluster_multiset()
        and a.separator_multiset() == b.separator_multiset()
    )


def stability(old: ClusterTree, new: ClusterTree) -> float:
    """Fraction of the new tree's clusters reused verbatim from the old tree."""
    if len(new) == 0:
        return 1.0
    shared = old.cluster_multiset() & new.cluster_multiset()
    return sum(shared.values()) / len(new)


# ---------------------------------------------------------------------------
# Random models and edit scripts (documented seeds live in the tests)
# ---------------------------------------------------------------------------


def random_dag(n: int, rng: Random, edge_prob: float = 0.25, prefix: str = "v") -> Dag:
    """A random dag: forward arcs over a shuffled topological order."""
    dag = Dag()
    ids = [dag.add_node(f"{prefix}{i}") for i in range(n)]
    order = list(ids)
    rng.shuffle(order)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                dag.add_arc(order[i], order[j])
    return dag


def random_script(dag: Dag, n_mods: int, rng: Random) -> list[Modification]:
    """A valid mixed edit script of at most n_mods modifications.

    Node removals are expanded into their incident arc removals, exactly as
    the script front-end does.
    """
    scratch = dag.copy()
    mods: list[Modification] = []
    kinds = ["add-arc", "remove-arc", "add-node", "remove-node"]
    weights = [4, 4, 1, 1]
    guard = 0
    while len(mods) < n_mods and guard < 50 * n_mods + 50:
        guard += 1
        kind = rng.choices(kinds, weights=weights)[0]
        nodes = scratch.nodes()
        if kind == "add-arc" and len(nodes) >= 2:
            for _ in range(30):
                u, v = rng.sample(nodes, 2)
                if not scratch.has_arc(u, v) and not scratch.has_path(v, u):
                    mod: Modification = AddArc(u, v)
                    apply_modification(scratch, mod)
                    mods.append(mod)
                    break
        elif kind == "remove-arc":
            arcs = scratch.arcs()
            if arcs:
                p, c = rng.choice(arcs)
                mod = RemoveArc(p, c)
                apply_modification(scratch, mod)
                mods.append(mod)
        elif kind == "add-node":
            mod = AddNode(f"r{scratch.table.next_id}")
            apply_modification(scratch, mod)
            mods.append(mod)
        elif kind == "remove-node" and nodes:
            node = rng.choice(nodes)
            expansion = expand_remove_node(scratch, node)
            if len(mods) + len(expansion) <= n_mods:
                for mod in expansion:
                    apply_modification(scratch, mod)
                mods.extend(expansion)
    return mods
