"""The bnic command line: compile, apply, and bench.

Exit codes: 0 success, 1 usage or parse failure, 2 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from random import Random

from .bench import run_bench
from .engine import BatchTrace, CompiledModel, incremental_compile
from .errors import BnicError, ParseError
from .fileio import dag_dot, parse_edits, parse_network, parse_script, tree_dot, undirected_dot
from .graph import Dag
from .oracle import full_recompile, mpd_equal, random_dag, validate

DEFAULT_SEED = 42


def _default_seed() -> int:
    env = os.environ.get("BNIC_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"BNIC_SEED must be an integer, got {env!r}")
    return DEFAULT_SEED


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        raise SystemExit(self._print_and_code(message))

    def _print_and_code(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="bnic", description="Compile Bayesian-network structure incrementally.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_compile = sub.add_parser("compile", help="compile a network from scratch")
    p_compile.add_argument("network", help="network file")
    p_compile.add_argument("--dot", metavar="DIR", help="write DOT files into DIR")

    p_apply = sub.add_parser("apply", help="compile, then replay an edit script")
    p_apply.add_argument("network", help="network file")
    p_apply.add_argument("script", help="edit script")
    p_apply.add_argument("--verify", action="store_true", help="check against a full recompile after every flush")
    p_apply.add_argument("--trace", action="store_true", help="print marked MPSs per modification")
    p_apply.add_argument("--dot", metavar="DIR", help="write DOT snapshots after each flush")

    p_bench = sub.add_parser("bench", help="time incremental vs full recompilation")
    p_bench.add_argument("network", nargs="?", help="network file (omit with --random)")
    p_bench.add_argument("script", nargs="?", help="edit script")
    p_bench.add_argument(
        "--random",
        nargs="+",
        type=int,
        metavar="N",
        help="N EDITS [SEED]: random network of N nodes, EDITS single-arc edits",
    )
    p_bench.add_argument("--csv", metavar="FILE", help="also write the report as CSV")
    return parser


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}")


def _write_dot(directory: str, names_to_text: dict[str, str]) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in names_to_text.items():
        (d / name).write_text(text, encoding="utf-8")


def _summary(model: CompiledModel) -> str:
    table = model.dag.table
    lines = [
        f"network: {len(model.dag)} variable(s), {model.dag.arc_count()} arc(s)",
        f"moral graph: {model.moral.edge_count()} edge(s)",
        f"triangulation: {len(model.tri.fill)} fill edge(s)",
    ]

    def tree_lines(tag, tree):
        out = [f"{tag}: {len(tree)} cluster(s)"]
        for cid in tree.cluster_ids():
            label = " ".join(table.name(v) for v in sorted(tree.cluster(cid)))
            out.append(f"  [{cid}] {label}")
        for a, b, sep in tree.edges():
            label = " ".join(table.name(v) for v in sorted(sep))
            out.append(f"  edge {a} -({label})- {b}")
        return out

    lines += tree_lines("junction tree", model.jt)
    lines += tree_lines("mpd tree", model.mpd)
    return "\n".join(lines)


def _print_trace(model: CompiledModel, trace: BatchTrace) -> None:
    table = model.dag.table

    def names(vs) -> str:
        return "{" + " ".join(table.name(v) if v in table else f"#{v}" for v in sorted(vs)) + "}"

    for rec in trace.mods:
        links = ", ".join(
            ("+" if l.added else "-") + names({l.u}).strip("{}") + "-" + names({l.v}).strip("{}")
            for l in rec.links
        )
        marked = ", ".join(names(vs) for _, vs in sorted(rec.touched.items()))
        print(f"  {rec.description}: links=[{links}] marked=[{marked}]")
        for rw in rec.rewired:
            print(f"    rewired empty separator to {names(rw['separator'])}")
    for sub in trace.subtrees:
        print(f"  re-triangulated over {names(sub.variables)} -> {len(sub.new_cliques)} clique(s)")
    for absorbed, into in trace.absorbed:
        print(f"  absorbed non-maximal {names(absorbed)} into {names(into)}")


def _verify(model: CompiledModel) -> str | None:
    report = validate(model)
    if not report.passed:
        return report.first_failure
    reference = full_recompile(model.dag)
    if not mpd_equal(model.mpd, reference.mpd):
        return "mpd_equality_vs_full_recompile"
    return None


def _cmd_compile(args) -> int:
    dag = parse_network(_read(args.network))
    model = full_recompile(dag)
    print(_summary(model))
    if args.dot:
        _write_dot(
            args.dot,
            {
                "network.dot": dag_dot(dag),
                "moral.dot": undirected_dot(model.moral, dag.table),
                "junction.dot": tree_dot(model.jt, dag.table, name="junction"),
                "mpd.dot": tree_dot(model.mpd, dag.table, name="mpd"),
            },
        )
    return 0


def _cmd_apply(args) -> int:
    dag = parse_network(_read(args.network))
    batches = parse_script(_read(args.script), dag)
    model = full_recompile(dag)
    if args.dot:
        _write_dot(
            args.dot,
            {
                "step000_junction.dot": tree_dot(model.jt, model.dag.table, name="junction"),
                "step000_mpd.dot": tree_dot(model.mpd, model.dag.table, name="mpd"),
            },
        )
    for i, batch in enumerate(batches, 1):
        trace = BatchTrace()
        incremental_compile(model, batch, trace)
        if args.trace:
            print(f"flush {i}:")
            _print_trace(model, trace)
        if args.dot:
            table = model.dag.table
            _write_dot(
                args.dot,
                {
                    f"step{i:03d}_junction.dot": tree_dot(
                        model.jt, table, name="junction", highlight=trace.new_jt_ids & set(model.jt.cluster_ids())
                    ),
                    f"step{i:03d}_mpd.dot": tree_dot(
                        model.mpd, table, name="mpd", highlight=trace.new_mpd_ids & set(model.mpd.cluster_ids())
                    ),
                },
            )
        if args.verify:
            failed = _verify(model)
            if failed is not None:
                print(f"verification failed after flush {i}: {failed}", file=sys.stderr)
                return 2
    print(_summary(model))
    return 0


def _cmd_bench(args) -> int:
    if args.random is not None:
        if args.network is not None or args.script is not None:
            raise ParseError("--random replaces the network and script arguments")
        if len(args.random) not in (2, 3):
            raise ParseError("--random takes N EDITS [SEED]")
        n, n_edits = args.random[0], args.random[1]
        seed = args.random[2] if len(args.random) == 3 else _default_seed()
        rng = Random(seed)
        dag = random_dag(n, rng, edge_prob=min(1.0, 3.0 / max(n - 1, 1)))
        edits = _random_arc_edits(dag, n_edits, rng)
    else:
        if args.network is None or args.script is None:
            raise ParseError("bench needs a network and script, or --random N EDITS [SEED]")
        dag = parse_network(_read(args.network))
        edits = parse_edits(_read(args.script), dag)
    model = full_recompile(dag)
    report = run_bench(model, edits)
    print(report.to_text())
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    if not report.all_verified():
        print("bench verification failed", file=sys.stderr)
        return 2
    return 0


def _random_arc_edits(dag: Dag, n_edits: int, rng: Random):
    from .engine import AddArc, RemoveArc, apply_modification

    scratch = dag.copy()
    edits = []
    guard = 0
    while len(edits) < n_edits and guard < 50 * n_edits + 50:
        guard += 1
        add = rng.random() < 0.5
        if add:
            nodes = scratch.nodes()
            for _ in range(30):
                u, v = rng.sample(nodes, 2)
                if not scratch.has_arc(u, v) and not scratch.has_path(v, u):
                    mod = AddArc(u, v)
                    apply_modification(scratch, mod)
                    name = f"add-arc {scratch.table.name(u)} {scratch.table.name(v)}"
                    edits.append((name, [mod]))
                    break
        else:
            arcs = scratch.arcs()
            if arcs:
                p, c = rng.choice(arcs)
                mod = RemoveArc(p, c)
                name = f"remove-arc {scratch.table.name(p)} {scratch.table.name(c)}"
                apply_modification(scratch, mod)
                edits.append((name, [mod]))
    return edits


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "compile":
            return _cmd_compile(args)
        if args.command == "apply":
            return _cmd_apply(args)
        if args.command == "bench":
            return _cmd_bench(args)
    except ParseError as exc:
        print(f"bnic: {exc}", file=sys.stderr)
        return 1
    except BnicError as exc:
        print(f"bnic: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
