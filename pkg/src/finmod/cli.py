"""Command-line surface over the workbench.

One verb per experiment family; every verb reads structures and machines
from JSON files, formulas from files or inline text, and emits a human
table by default or machine-readable JSON/CSV via --format.  Exit codes:
0 on success, 1 on a domain error (the message names the violated
precondition), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

from .evaluation import (
    Assignment,
    EvaluationError,
    FixedPointAt,
    depth,
    depth_over_size,
    inflationary_depth,
    nested_fixpoint,
    satisfies,
    simultaneous_fixpoint,
    stages,
)
from .formulas import (
    Fixpoint,
    Formula,
    FormulaError,
    SimFixpoint,
    count_metrics,
    to_text,
)
from .games import (
    GameError,
    ef_game,
    optimal_move,
    pebble_game,
    s_rank,
    survey_presets,
    survey_ranks,
)
from .nspace import (
    MachineError,
    compile_sentence,
    config_graph,
    graph_accepts,
    load_machine,
    run_ntm,
    sentence_truth,
)
from .parser import ParseError, parse
from .rankers import RankerError, parse_ranker, ranker_eval
from .structures import (
    Relation,
    Structure,
    StructureError,
    Vocabulary,
    encode_binary,
    load_structure,
    structure_to_json,
)
from .transforms import (
    TransformError,
    apply_interpretation,
    dual_formula,
    forall_count_h,
    iterate_qb,
    load_interpretation,
    pfp_disjunction_sentence,
    to_quantifier_block,
    unfold_stage_formula,
)

DOMAIN_ERRORS = (
    StructureError,
    FormulaError,
    ParseError,
    EvaluationError,
    GameError,
    TransformError,
    MachineError,
    RankerError,
    OSError,
    json.JSONDecodeError,
)


def _read_formula(args, attr: str = "formula", expr_attr: str = "expr") -> Formula:
    path = getattr(args, attr, None)
    expr = getattr(args, expr_attr, None)
    if path:
        with open(path) as handle:
            return parse(handle.read())
    if expr:
        return parse(expr)
    raise FormulaError("a formula is required (--formula FILE or --expr TEXT)")


def _fixpoint_parts(args, phi: Formula) -> tuple[Formula, str, tuple[str, ...]]:
    if isinstance(phi, Fixpoint):
        return phi.body, phi.rel, phi.vars
    rel = getattr(args, "rel", None)
    vars_ = getattr(args, "vars", None)
    if rel and vars_:
        return phi, rel, tuple(vars_.split(","))
    raise FormulaError(
        "the formula is not a fixed-point expression; pass --rel and --vars"
    )


def _assignment(args) -> Assignment:
    values = json.loads(args.assign) if getattr(args, "assign", None) else {}
    return Assignment(values={str(k): int(v) for k, v in values.items()})


def _emit(args, payload: dict, table_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif args.format == "csv":
        rows = payload.get("rows")
        if rows is None:
            rows = [[k, v] for k, v in sorted(payload.items())]
        for row in rows:
            print(",".join(str(cell) for cell in row))
    else:
        for line in table_lines:
            print(line)


def _depth_str(value) -> str:
    return "infinity" if value == math.inf else str(int(value))


# ----------------------------------------------------------- handlers


def cmd_eval(args) -> int:
    structure = load_structure(args.structure)
    phi = _read_formula(args)
    env = _assignment(args)
    result = satisfies(structure, phi, env)
    _emit(args, {"value": result}, ["true" if result else "false"])
    return 0


def cmd_stages(args) -> int:
    structure = load_structure(args.structure)
    phi = _read_formula(args)
    body, rel, vars_ = _fixpoint_parts(args, phi)
    trace = stages(structure, body, rel, vars_, _assignment(args))
    lines = [
        f"stage {i}: {sorted(stage.tuples)}" for i, stage in enumerate(trace.stages)
    ]
    if isinstance(trace.verdict, FixedPointAt):
        lines.append(f"fixed point at depth {trace.verdict.depth}")
    else:
        lines.append(
            f"no fixed point: cycle of length {trace.verdict.cycle_length} "
            f"from stage {trace.verdict.cycle_start}"
        )
    _emit(args, trace.to_json(), lines)
    return 0


def cmd_depth(args) -> int:
    phi = _read_formula(args)
    if args.over_size:
        with open(args.vocab) as handle:
            data = json.load(handle)
        vocab = Vocabulary(
            relations=tuple((n, a) for n, a in data["relations"]),
            constants=tuple(data.get("constants", ())),
            builtins=bool(data.get("builtins", False)),
        )
        body, rel, vars_ = _fixpoint_parts(args, phi)
        value = depth_over_size(body, rel, vars_, vocab, args.over_size, args.limit)
        _emit(args, {"depth": None if value == math.inf else value}, [_depth_str(value)])
        return 0
    structure = load_structure(args.structure)
    body, rel, vars_ = _fixpoint_parts(args, phi)
    if args.inflationary:
        value = inflationary_depth(structure, body, rel, vars_, _assignment(args))
    else:
        value = depth(structure, body, rel, vars_, _assignment(args))
    _emit(args, {"depth": None if value == math.inf else value}, [_depth_str(value)])
    return 0


def cmd_sim(args) -> int:
    structure = load_structure(args.structure)
    phi = _read_formula(args)
    if not isinstance(phi, SimFixpoint):
        raise FormulaError("sim expects a simultaneous fixed-point expression")
    result = simultaneous_fixpoint(structure, list(phi.defs), _assignment(args))
    payload = {
        "iterations": result.iterations,
        "exists": result.exists,
        "relations": {
            name: [list(t) for t in rel.sorted_tuples()]
            for name, rel in result.relations.items()
        },
    }
    lines = [
        f"iterations: {result.iterations}",
        f"fixed point exists: {result.exists}",
    ] + [f"{name} = {sorted(rel.tuples)}" for name, rel in result.relations.items()]
    _emit(args, payload, lines)
    return 0


def cmd_nested(args) -> int:
    structure = load_structure(args.structure)
    with open(args.outer) as handle:
        outer = parse(handle.read())
    with open(args.inner) as handle:
        inner = parse(handle.read())
    if not isinstance(outer, Fixpoint) or not isinstance(inner, Fixpoint):
        raise FormulaError("nested expects fixed-point expressions for --outer and --inner")
    report = nested_fixpoint(
        structure,
        (outer.rel, outer.vars, outer.body),
        (inner.rel, inner.vars, inner.body),
        _assignment(args),
        inflationary_outer=args.inflationary_outer,
    )
    lines = [
        f"convention: {report.convention}",
        f"outer depth: {report.outer_depth} (exists: {report.outer_exists})",
        f"inner depths per outer evaluation: {report.inner_depths}",
        f"total inner iterations: {report.total_inner_iterations}",
    ]
    _emit(args, report.to_json(), lines)
    return 0


def _parse_tuple(text: Optional[str]) -> tuple:
    if not text:
        return ()
    return tuple(None if part == "_" else int(part) for part in text.split(","))


def cmd_game(args) -> int:
    left = load_structure(args.left)
    right = load_structure(args.right)
    result = ef_game(
        left, _parse_tuple(args.left_tuple), right, _parse_tuple(args.right_tuple), args.m
    )
    payload = {"winner": result.winner}
    lines = [result.winner]
    if args.opening and result.winner == "Spoiler":
        move = result.recommend(result.start)
        payload["opening"] = {"structure": move.side, "element": move.element}
        lines.append(f"opening move: {move.element} in the {move.side} structure")
    _emit(args, payload, lines)
    return 0


def cmd_pebble(args) -> int:
    left = load_structure(args.left)
    right = load_structure(args.right)
    s = args.s
    ltup = _parse_tuple(args.left_tuple) or (None,) * s
    rtup = _parse_tuple(args.right_tuple) or (None,) * s
    m = None if args.infinite else args.m
    if m is None and args.m is None and not args.infinite:
        raise GameError("pass -m MOVES or --infinite")
    result = pebble_game(left, ltup, right, rtup, s, m)
    _emit(args, {"winner": result.winner}, [result.winner])
    return 0


def cmd_rank(args) -> int:
    structure = load_structure(args.structure)
    value = s_rank(structure, args.s)
    _emit(args, {"rank": value}, [str(value)])
    return 0


def cmd_survey(args) -> int:
    sizes = _parse_sizes(args.sizes)
    rows = survey_ranks(args.preset, args.s, sizes)
    payload = {"rows": [[n, r] for n, r in rows]}
    lines = ["size rank"] + [f"{n:4d} {r:4d}" for n, r in rows]
    _emit(args, payload, lines)
    return 0


def _parse_sizes(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",")]


def cmd_qb(args) -> int:
    phi = _read_formula(args)
    body, rel, vars_ = _fixpoint_parts(args, phi)
    qb = to_quantifier_block(body, rel, vars_)
    payload = {
        "prefixLength": len(qb.prefix),
        "formula": to_text(qb.formula()),
    }
    lines = [f"prefix length: {len(qb.prefix)}", to_text(qb.formula())]
    if args.iterate is not None:
        structure = load_structure(args.structure)
        relation = iterate_qb(structure, qb, args.iterate)
        payload["iterated"] = [list(t) for t in relation.sorted_tuples()]
        lines.append(f"after {args.iterate} rounds: {sorted(relation.tuples)}")
    _emit(args, payload, lines)
    return 0


def cmd_unfold(args) -> int:
    phi = _read_formula(args)
    body, rel, vars_ = _fixpoint_parts(args, phi)
    stage = unfold_stage_formula(body, rel, vars_, args.n)
    metrics = count_metrics(stage)
    payload = {
        "connectives": metrics.connectives,
        "quantifierRank": metrics.quantifier_rank,
        "distinctVariables": metrics.distinct_variables,
    }
    lines = [
        f"connectives: {metrics.connectives}",
        f"quantifier rank: {metrics.quantifier_rank}",
        f"distinct variables: {metrics.distinct_variables}",
    ]
    if args.text:
        payload["formula"] = to_text(stage)
        lines.append(to_text(stage))
    _emit(args, payload, lines)
    return 0


def cmd_counts(args) -> int:
    if args.recurrence:
        l, m, i = (int(part) for part in args.recurrence.split(","))
        value = forall_count_h(l, m, i)
        _emit(args, {"h": value}, [str(value)])
        return 0
    phi = _read_formula(args)
    metrics = count_metrics(phi)
    payload = {
        "quantifierRank": metrics.quantifier_rank,
        "distinctVariables": metrics.distinct_variables,
        "connectives": metrics.connectives,
        "forallSymbols": metrics.forall_symbols,
        "existsSymbols": metrics.exists_symbols,
    }
    lines = [f"{key}: {value}" for key, value in payload.items()]
    _emit(args, payload, lines)
    return 0


def cmd_interp(args) -> int:
    structure = load_structure(args.structure)
    interp = load_interpretation(args.interp, structure.vocab)
    if args.dual:
        theta = _read_formula(args)
        dual = dual_formula(interp, theta)
        _emit(args, {"formula": to_text(dual)}, [to_text(dual)])
        return 0
    image = apply_interpretation(interp, structure)
    payload = structure_to_json(image)
    lines = [
        f"size: {image.size}",
    ] + [
        f"{name} = {sorted(rel.tuples)}" for name, rel in image.declared_relations().items()
    ]
    _emit(args, payload, lines)
    return 0


def cmd_ranker(args) -> int:
    ranker = parse_ranker(args.ranker)
    value = ranker_eval(ranker, args.word)
    _emit(
        args,
        {"position": value},
        ["undefined" if value is None else str(value)],
    )
    return 0


def cmd_compile(args) -> int:
    machine = load_machine(args.machine)
    structure = load_structure(args.structure)
    compiled = compile_sentence(machine, structure.vocab, structure.size)
    payload = compiled.to_json()
    lines = [
        f"tuple length g: {compiled.params.tuple_len}",
        f"skeleton depth: {compiled.skeleton_depth}",
        f"skeleton connectives: {compiled.skeleton_connectives}",
        f"sentence connectives: {compiled.counts.connectives}",
        f"distinct variables: {compiled.counts.distinct_variables}",
    ]
    if args.check:
        truth = sentence_truth(compiled, structure)
        simulated = run_ntm(machine, structure)
        graph = graph_accepts(config_graph(machine, structure))
        payload["check"] = {"sentence": truth, "simulator": simulated, "graph": graph}
        lines.append(f"sentence: {truth}  simulator: {simulated}  graph: {graph}")
        if not truth == simulated == graph:
            raise MachineError("the three acceptance views disagree")
    _emit(args, payload, lines)
    return 0


def cmd_encode(args) -> int:
    structure = load_structure(args.structure)
    bits = encode_binary(structure)
    _emit(args, {"bits": bits, "length": len(bits)}, [bits])
    return 0


def cmd_sim_machine(args) -> int:
    machine = load_machine(args.machine)
    structure = load_structure(args.structure)
    verdict = run_ntm(machine, structure)
    _emit(args, {"accepts": verdict}, ["accept" if verdict else "reject"])
    return 0


# -------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finmod",
        description="Finite-model-theory workbench: fixed-point evaluation, "
        "model-comparison games, formula transforms, machine compilation.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--format", choices=("table", "json", "csv"), default="table")

    def with_formula(p):
        p.add_argument("--formula", help="formula file")
        p.add_argument("--expr", help="inline formula text")

    p = sub.add_parser("eval", help="truth of a formula on a structure")
    p.add_argument("--structure", required=True)
    with_formula(p)
    p.add_argument("--assign", help='JSON variable assignment, e.g. {"x": 0}')
    common(p)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("stages", help="stage trace of a fixed-point body")
    p.add_argument("--structure", required=True)
    with_formula(p)
    p.add_argument("--rel")
    p.add_argument("--vars", help="comma-separated bound variables")
    p.add_argument("--assign")
    common(p)
    p.set_defaults(handler=cmd_stages)

    p = sub.add_parser("depth", help="fixed-point depth (or inflationary depth)")
    p.add_argument("--structure")
    with_formula(p)
    p.add_argument("--rel")
    p.add_argument("--vars")
    p.add_argument("--assign")
    p.add_argument("--inflationary", action="store_true")
    p.add_argument("--over-size", type=int, help="maximize over all structures of this size")
    p.add_argument("--vocab", help="vocabulary JSON file for --over-size")
    p.add_argument("--limit", type=int, default=1 << 24)
    common(p)
    p.set_defaults(handler=cmd_depth)

    p = sub.add_parser("sim", help="simultaneous fixed point of a system")
    p.add_argument("--structure", required=True)
    with_formula(p)
    p.add_argument("--assign")
    common(p)
    p.set_defaults(handler=cmd_sim)

    p = sub.add_parser("nested", help="nested fixed point with cost breakdown")
    p.add_argument("--structure", required=True)
    p.add_argument("--outer", required=True, help="outer fixed-point formula file")
    p.add_argument("--inner", required=True, help="inner fixed-point formula file")
    p.add_argument("--assign")
    p.add_argument("--inflationary-outer", action="store_true")
    common(p)
    p.set_defaults(handler=cmd_nested)

    p = sub.add_parser("game", help="m-round element game between two structures")
    p.add_argument("--ef", action="store_true", help="round game (default and only kind)")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--left-tuple", help="comma-separated start elements")
    p.add_argument("--right-tuple")
    p.add_argument("--opening", action="store_true", help="also print a winning opening move")
    common(p)
    p.set_defaults(handler=cmd_game)

    p = sub.add_parser("pebble", help="s-pebble game between two structures")
    p.add_argument("-s", type=int, required=True)
    p.add_argument("-m", type=int)
    p.add_argument("--infinite", action="store_true")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--left-tuple", help="comma-separated, _ marks an off-board pebble")
    p.add_argument("--right-tuple")
    common(p)
    p.set_defaults(handler=cmd_pebble)

    p = sub.add_parser("rank", help="stabilization index of a structure with itself")
    p.add_argument("--structure", required=True)
    p.add_argument("-s", type=int, required=True)
    common(p)
    p.set_defaults(handler=cmd_rank)

    p = sub.add_parser("survey", help="max rank per size over a preset class")
    p.add_argument("--preset", choices=survey_presets(), required=True)
    p.add_argument("-s", type=int, required=True)
    p.add_argument("--sizes", required=True, help="e.g. 3..8 or 3,5,7")
    common(p)
    p.set_defaults(handler=cmd_survey)

    p = sub.add_parser("qb", help="guarded quantifier block of a positive body")
    with_formula(p)
    p.add_argument("--rel")
    p.add_argument("--vars")
    p.add_argument("--iterate", type=int, help="apply the block this many times")
    p.add_argument("--structure", help="structure for --iterate")
    common(p)
    p.set_defaults(handler=cmd_qb)

    p = sub.add_parser("unfold", help="first-order formula for stage n of a body")
    with_formula(p)
    p.add_argument("--rel")
    p.add_argument("--vars")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--text", action="store_true", help="print the formula itself")
    common(p)
    p.set_defaults(handler=cmd_unfold)

    p = sub.add_parser("counts", help="syntactic metrics of a formula")
    with_formula(p)
    p.add_argument(
        "--recurrence",
        help="l,m,i: connective count of the i-th unfolded stage formula",
    )
    common(p)
    p.set_defaults(handler=cmd_counts)

    p = sub.add_parser("interp", help="apply an interpretation, or rewrite dually")
    p.add_argument("--interp", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--dual", action="store_true")
    with_formula(p)
    common(p)
    p.set_defaults(handler=cmd_interp)

    p = sub.add_parser("ranker", help="evaluate a ranker on a word")
    p.add_argument("--word", required=True)
    p.add_argument("--ranker", required=True, help="e.g. '>1>1<0'")
    common(p)
    p.set_defaults(handler=cmd_ranker)

    p = sub.add_parser("compile", help="reachability sentence for a machine at a size")
    p.add_argument("--machine", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--check", action="store_true", help="cross-check the three views")
    common(p)
    p.set_defaults(handler=cmd_compile)

    p = sub.add_parser("run", help="run a machine on a structure's binary code")
    p.add_argument("--machine", required=True)
    p.add_argument("--structure", required=True)
    common(p)
    p.set_defaults(handler=cmd_sim_machine)

    p = sub.add_parser("encode", help="binary code of an ordered structure")
    p.add_argument("--structure", required=True)
    common(p)
    p.set_defaults(handler=cmd_encode)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DOMAIN_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
