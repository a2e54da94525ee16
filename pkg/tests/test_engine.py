from random import Random

import pytest

from bnic import (
    AddArc,
    AddNode,
    BatchTrace,
    ClusterTree,
    CycleError,
    Dag,
    InvalidEditError,
    RemoveArc,
    RemoveNode,
    absorb_non_maximal,
    apply_modification,
    connect,
    expand_remove_node,
    full_recompile,
    incremental_compile,
    mark_remove_link,
    modify_moral_graph,
    moralize,
    mpd_equal,
    random_dag,
    random_script,
    stability,
    validate,
)

from conftest import cluster_names, name_set


def _link_names(table, links):
    return {(name_set(table, link.pair), link.added) for link in links}


def _marked_names(table, rec):
    return {name_set(table, vs) for vs in rec.marked_sets()}


# -- moral graph maintenance --------------------------------------------------


def test_remove_arc_deletes_induced_moral_link(asia_model):
    m = asia_model
    t = m.dag.table
    mod = RemoveArc(t.id("L"), t.id("E"))
    apply_modification(m.dag, mod)
    links = modify_moral_graph(m, mod)
    assert _link_names(t, links) == {(frozenset("LE"), False), (frozenset("TL"), False)}
    assert m.moral == moralize(m.dag)


def test_remove_arc_keeps_edge_justified_by_common_child():
    dag = Dag()
    x, y, z = dag.add_node("x"), dag.add_node("y"), dag.add_node("z")
    dag.add_arc(x, z)
    dag.add_arc(y, z)
    dag.add_arc(x, y)
    m = full_recompile(dag)
    mod = RemoveArc(x, y)
    apply_modification(m.dag, mod)
    links = modify_moral_graph(m, mod)
    assert links == []
    assert m.moral.has_edge(x, y)  # still married through z
    assert m.moral == moralize(m.dag)


def test_add_arc_completes_the_family(asia_model):
    # adding Z -> X after Z exists: the arc link plus the induced Z-E link
    m = asia_model
    t = m.dag.table
    incremental_compile(m, [AddNode("Z")])
    z = t.id("Z")
    mod = AddArc(z, t.id("X"))
    apply_modification(m.dag, mod)
    links = modify_moral_graph(m, mod)
    assert _link_names(t, links) == {(frozenset("ZX"), True), (frozenset("ZE"), True)}
    assert m.moral == moralize(m.dag)


def test_add_and_remove_node_touch_only_the_vertex(asia_model):
    m = asia_model
    mod = AddNode("Q")
    apply_modification(m.dag, mod)
    assert modify_moral_graph(m, mod) == []
    q = m.dag.table.id("Q")
    assert m.moral.has_vertex(q) and not m.moral.neighbors(q)
    mod = RemoveNode(q)
    apply_modification(m.dag, mod)
    assert modify_moral_graph(m, mod) == []
    assert not m.moral.has_vertex(q)


# -- marking: link removal ----------------------------------------------------


def test_mark_remove_link_spreads_across_affected_separators(asia_model):
    m = asia_model
    t = m.dag.table
    mod = RemoveArc(t.id("L"), t.id("E"))
    apply_modification(m.dag, mod)
    links = modify_moral_graph(m, mod)
    from bnic.engine import ModTrace

    rec = ModTrace(mod=mod, description="x")
    mark_remove_link(m, links, m.index.mps_of[t.id("E")], None, rec)
    assert _marked_names(t, rec) == {frozenset("TLE"), frozenset("SLBE")}


def test_mark_remove_link_stays_local_without_separator_hits():
    # v0 -> v1 -> v2: removing v1 -> v2 affects only the host of v2
    dag = Dag()
    a, b, c = dag.add_node("a"), dag.add_node("b"), dag.add_node("c")
    dag.add_arc(a, b)
    dag.add_arc(b, c)
    m = full_recompile(dag)
    mod = RemoveArc(b, c)
    apply_modification(m.dag, mod)
    links = modify_moral_graph(m, mod)
    from bnic.engine import ModTrace

    rec = ModTrace(mod=mod, description="x")
    mark_remove_link(m, links, m.index.mps_of[c], None, rec)
    assert len(rec.touched) == 1


def _closure_marks(model, links, start):
    # brute force: spread from the start MPS across any separator that lost
    # one of the deleted pairs
    deleted = [l.pair for l in links if not l.added]
    marked = {start}
    frontier = [start]
    while frontier:
        m_id = frontier.pop()
        for nb in model.mpd.neighbors(m_id):
            if nb in marked:
                continue
            sep = model.mpd.separator(m_id, nb)
            if any(pair <= sep for pair in deleted):
                marked.add(nb)
                frontier.append(nb)
    return marked


def test_mark_remove_link_equals_brute_force_closure():
    from bnic.engine import ModTrace

    rng = Random(41)
    checked = 0
    for _ in range(40):
        dag = random_dag(rng.randint(2, 14), rng, edge_prob=0.3)
        arcs = dag.arcs()
        if not arcs:
            continue
        m = full_recompile(dag)
        p, c = rng.choice(arcs)
        mod = RemoveArc(p, c)
        apply_modification(m.dag, mod)
        links = modify_moral_graph(m, mod)
        start = m.index.mps_of[c]
        expected = _closure_marks(m, links, start)
        rec = ModTrace(mod=mod, description="x")
        mark_remove_link(m, links, start, None, rec)
        assert set(rec.touched) == expected
        checked += 1
    assert checked > 20


# -- marking: node removal ----------------------------------------------------


def test_remove_node_strips_variable_from_hosting_cluster(asia_model):
    m = asia_model
    t = m.dag.table
    trace = BatchTrace()
    incremental_compile(m, expand_remove_node(m.dag, t.id("D")), trace)
    node_rec = trace.mods[-1]
    assert isinstance(node_rec.mod, RemoveNode)
    # the hosting MPS lost D before the rebuild
    assert _marked_names(t, node_rec) == {frozenset("EB")}


def test_remove_node_spanning_three_clusters():
    dag = Dag()
    x = dag.add_node("x")
    leaves = [dag.add_node(n) for n in "abc"]
    for leaf in leaves:
        dag.add_arc(x, leaf)
    m = full_recompile(dag)
    trace = BatchTrace()
    incremental_compile(m, expand_remove_node(m.dag, x), trace)
    node_rec = trace.mods[-1]
    assert len(node_rec.touched) == 3
    assert all(x not in vs for vs in node_rec.touched.values())
    for tree in (m.jt, m.mpd):
        assert all(x not in tree.cluster(c) for c in tree.cluster_ids())
        assert all(x not in sep for _, _, sep in tree.edges())
    assert validate(m).passed


def test_remove_node_in_single_cluster_marks_once():
    dag = Dag()
    a, b = dag.add_node("a"), dag.add_node("b")
    dag.add_arc(a, b)
    m = full_recompile(dag)
    trace = BatchTrace()
    incremental_compile(m, expand_remove_node(m.dag, b), trace)
    assert len(trace.mods[-1].touched) == 1
    assert validate(m).passed


def test_remove_last_node_leaves_empty_model():
    dag = Dag()
    dag.add_node("solo")
    m = full_recompile(dag)
    incremental_compile(m, [RemoveNode(0)])
    assert len(m.jt) == 0 and len(m.mpd) == 0 and len(m.dag) == 0
    assert validate(m).passed


# -- adding nodes -------------------------------------------------------------


def test_add_node_attaches_singleton_by_empty_separator(asia_model):
    m = asia_model
    incremental_compile(m, [AddNode("Z")])
    z = m.dag.table.id("Z")
    for tree in (m.jt, m.mpd):
        (host,) = [c for c in tree.cluster_ids() if tree.cluster(c) == frozenset({z})]
        assert [tree.separator(host, nb) for nb in tree.neighbors(host)] == [frozenset()]
    assert validate(m).passed


def test_add_node_into_empty_model():
    m = full_recompile(Dag())
    incremental_compile(m, [AddNode("first")])
    assert len(m.jt) == 1 and len(m.mpd) == 1
    assert validate(m).passed


def test_two_add_nodes_in_one_batch_stay_one_tree(asia_model):
    m = asia_model
    incremental_compile(m, [AddNode("Y"), AddNode("Z")])
    assert m.jt.is_tree() and m.mpd.is_tree()
    assert validate(m).passed


# -- adding links -------------------------------------------------------------


def test_add_link_inside_one_mps_marks_only_it(asia_model):
    m = asia_model
    t = m.dag.table
    trace = BatchTrace()
    incremental_compile(m, [AddArc(t.id("L"), t.id("B"))], trace)
    assert _marked_names(t, trace.mods[0]) == {frozenset("SLBE")}
    ref = full_recompile(m.dag.copy())
    assert mpd_equal(m.mpd, ref.mpd) and validate(m).passed


def test_add_link_rewires_empty_separator(asia_model):
    m = asia_model
    t = m.dag.table
    z = t.next_id
    trace = BatchTrace()
    incremental_compile(m, [AddNode("Z"), AddArc(t.id("A"), z)], trace)
    arc_rec = trace.mods[1]
    assert _marked_names(t, arc_rec) == {frozenset("Z"), frozenset("AT")}
    assert [rw["separator"] for rw in arc_rec.rewired] == [frozenset({t.id("A")})]
    assert validate(m).passed


def test_add_link_marks_the_path_between_hosts(asia_model):
    m = asia_model
    t = m.dag.table
    z = t.next_id
    trace = BatchTrace()
    incremental_compile(
        m, [AddNode("Z"), AddArc(t.id("A"), z), AddArc(z, t.id("X"))], trace
    )
    last = trace.mods[2]
    assert _marked_names(t, last) == {
        frozenset("Z"),
        frozenset("AT"),
        frozenset("TLE"),
        frozenset("EX"),
    }
    assert last.rewired == []
    (sub,) = trace.subtrees
    assert name_set(t, sub.variables) == frozenset("ZATLEX")
    ref = full_recompile(m.dag.copy())
    assert mpd_equal(m.mpd, ref.mpd) and validate(m).passed


# -- connect and absorb -------------------------------------------------------


def test_connect_reattaches_boundary_to_best_cover():
    tree = ClusterTree()
    doomed = tree.add_cluster({1, 2, 3}, marked=True)
    outside = tree.add_cluster({2, 3, 9})
    tree.add_edge(doomed, outside, {2, 3})
    fresh = [tree.add_cluster(vs) for vs in ({1, 2}, {2, 3}, {3, 4})]
    records, visited = connect(tree, set(fresh), doomed, None)
    assert visited == {doomed}
    ((_, ck, sep, target),) = records
    assert (ck, sep) == (outside, frozenset({2, 3}))
    assert tree.cluster(target) == frozenset({2, 3})  # = S: amalgamation case
    assert tree.has_edge(target, outside)


def test_connect_with_everything_marked_makes_no_records():
    tree = ClusterTree()
    a = tree.add_cluster({1, 2}, marked=True)
    b = tree.add_cluster({2, 3}, marked=True)
    tree.add_edge(a, b, {2})
    fresh = tree.add_cluster({1, 2, 3})
    records, visited = connect(tree, {fresh}, a, None)
    assert records == [] and visited == {a, b}


def test_absorb_collapses_subset_chain():
    tree = ClusterTree()
    ab = tree.add_cluster({0, 1})
    mid = tree.add_cluster({1})
    bc = tree.add_cluster({1, 2})
    tree.add_edge(ab, mid, {1})
    tree.add_edge(mid, bc, {1})
    absorb_non_maximal(tree)
    assert sorted(tree.cluster(c) for c in tree.cluster_ids()) == [{0, 1}, {1, 2}]
    assert tree.separator(ab, bc) == frozenset({1})


def test_absorb_leaves_maximal_trees_alone(asia_model):
    before = asia_model.jt.cluster_multiset()
    absorb_non_maximal(asia_model.jt)
    assert asia_model.jt.cluster_multiset() == before


# -- full scenarios -----------------------------------------------------------


def test_remove_arc_scenario_replaces_only_marked_subtree(asia, asia_model):
    m = asia_model
    t = asia.table
    old_jt = m.jt.copy()
    old_clusters = cluster_names(old_jt, t)
    trace = BatchTrace()
    incremental_compile(m, [RemoveArc(t.id("L"), t.id("E"))], trace)
    new_clusters = cluster_names(m.jt, t)
    # unmarked clusters survive verbatim
    for survivor in (frozenset("AT"), frozenset("EBD"), frozenset("EX")):
        assert survivor in old_clusters and survivor in new_clusters
    ref = full_recompile(m.dag.copy())
    assert mpd_equal(m.mpd, ref.mpd)
    assert validate(m).passed
    assert stability(old_jt, m.jt) == pytest.approx(0.5)


def test_remove_node_scenario_absorbs_nonmaximal_cluster(asia_model):
    m = asia_model
    t = m.dag.table
    trace = BatchTrace()
    incremental_compile(m, expand_remove_node(m.dag, t.id("D")), trace)
    (sub,) = trace.subtrees
    assert name_set(t, sub.variables) == frozenset("EBLS")
    assert frozenset("LE") in {name_set(t, c) for c in sub.new_cliques}
    assert (frozenset("LE"), frozenset("TLE")) in {
        (name_set(t, a), name_set(t, b)) for a, b in trace.absorbed
    }
    clusters = list(cluster_names(m.jt, t))
    assert frozenset("LE") not in clusters and frozenset("TLE") in clusters
    for a in clusters:
        assert not any(a < b for b in clusters)
    ref = full_recompile(m.dag.copy())
    assert mpd_equal(m.mpd, ref.mpd) and validate(m).passed


def test_locality_on_random_edits():
    # every clique of an unmarked MPS survives with its vertex set intact
    # (or, in rare corner cases, is absorbed into a strict superset)
    rng = Random(77)
    for _ in range(15):
        dag = random_dag(rng.randint(3, 16), rng, edge_prob=0.25)
        model = full_recompile(dag.copy())
        old = model.copy()
        script = random_script(dag, 3, rng)
        trace = BatchTrace()
        incremental_compile(model, script, trace)
        after = model.jt.cluster_multiset()
        marked = trace.marked_ids()
        survivors = 0
        for m in old.mpd.cluster_ids():
            if m in marked:
                continue
            for k in old.index.cliques_of[m]:
                vs = old.jt.cluster(k)
                if vs in after:
                    survivors += 1
                else:
                    assert any(vs < other for other in after)
        if len(model.jt):
            assert stability(old.jt, model.jt) >= survivors / len(model.jt)


# -- validation of edits ------------------------------------------------------


def test_invalid_modifications_are_rejected(asia_model):
    m = asia_model
    t = m.dag.table
    with pytest.raises(CycleError):
        incremental_compile(m, [AddArc(t.id("X"), t.id("A"))])
    with pytest.raises(InvalidEditError):
        incremental_compile(m, [AddArc(t.id("A"), t.id("T"))])
    with pytest.raises(InvalidEditError):
        incremental_compile(m, [RemoveNode(t.id("E"))])
    with pytest.raises(InvalidEditError):
        incremental_compile(m, [RemoveArc(t.id("A"), t.id("E"))])
    with pytest.raises(InvalidEditError):
        incremental_compile(m, [AddNode("A")])
    # the model stayed intact through all rejections
    assert validate(m).passed


def test_empty_batch_is_a_no_op(asia_model):
    before = asia_model.jt.cluster_multiset()
    incremental_compile(asia_model, [])
    assert asia_model.jt.cluster_multiset() == before
    assert validate(asia_model).passed


# -- regressions --------------------------------------------------------------


def test_stale_family_host_still_spreads_marks():
    # an arc added earlier in the batch leaves the child's family host
    # without the new parent; the deletion of an induced moral link later in
    # the same batch must still reach every cluster holding the dead pair
    dag = Dag()
    v = [dag.add_node(f"v{i}") for i in range(6)]
    for p, c in [(2, 1), (3, 1), (4, 1), (0, 2), (0, 3), (0, 4), (5, 4), (2, 5)]:
        dag.add_arc(v[p], v[c])
    model = full_recompile(dag.copy())
    incremental_compile(
        model, [AddArc(v[0], v[1]), RemoveArc(v[0], v[2]), RemoveArc(v[0], v[1])]
    )
    ref = full_recompile(model.dag.copy())
    assert mpd_equal(model.mpd, ref.mpd) and validate(model).passed


def test_rewiring_never_severs_marked_subtrees():
    # node removals can empty a separator between two marked clusters; a
    # later arc addition must not delete that edge while rewiring, or the
    # pending rebuild region falls apart (pinned multi-batch seeds)
    for seed in (356, 654, 260, 511):
        rng = Random(777_000 + seed)
        n = rng.randint(1, 30)
        dag = random_dag(n, rng, edge_prob=rng.choice([0.05, 0.15, 0.3, 0.5, 0.7]))
        model = full_recompile(dag.copy())
        for _ in range(rng.randint(1, 3)):
            script = random_script(model.dag, rng.randint(1, 12), rng)
            incremental_compile(model, script)
            ref = full_recompile(model.dag.copy())
            assert mpd_equal(model.mpd, ref.mpd) and validate(model).passed


# -- batch vs simple ----------------------------------------------------------


def test_batch_and_simple_mode_agree():
    rng = Random(99)
    for _ in range(10):
        dag = random_dag(rng.randint(2, 14), rng, edge_prob=0.3)
        script = random_script(dag, 6, rng)
        batch = full_recompile(dag.copy())
        simple = full_recompile(dag.copy())
        incremental_compile(batch, script)
        for mod in script:
            incremental_compile(simple, [mod])
        assert mpd_equal(batch.mpd, simple.mpd)
        assert validate(batch).passed and validate(simple).passed
